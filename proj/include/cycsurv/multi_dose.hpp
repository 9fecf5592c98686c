#pragma once

#include "cycsurv/covariate.hpp"
#include "cycsurv/schedule.hpp"
#include "cycsurv/single_dose.hpp"

namespace cycsurv {

// Whole-trajectory inversion for the constant baseline h0 = lambda.  Instead
// of drawing per infusion gap, the cumulative hazard of the full piecewise
// trajectory is accumulated across gaps and inverted once at v = -log(u).
//
// For gap k of length I_k the hazard contribution is
//
//   lambda * e^(eta'x) * [ (e^(beta*min(I_k, t_s)) - 1)/beta
//                          + max(I_k - t_s, 0) * e^(beta*t_s) ]
//
// i.e. an exponentially growing part up to the threshold plus a flat tail
// when the gap outlasts protection.  This handles irregular gaps (missed or
// jittered infusions) with no special cases.

struct SegmentBounds {
  // lower[k] = H(t_k) and upper[k] = H(end of gap k); lower[0] == 0,
  // lower[k+1] == upper[k], and the last upper is H(study_end).
  std::vector<double> lower;
  std::vector<double> upper;
};

SegmentBounds segment_bounds(const EffectModel& em, const SubjectCovariates& sc,
                             double lambda, const InfusionSchedule& s);

// Locates v = -log(u) in the segment bounds and inverts within the covering
// gap (logarithmic inverse on the growing branch, linear on the flat one).
// v beyond H(study_end) censors at study_end.  Distributionally identical to
// aggregate_multidose over draw_exponential with the same inputs.
SubjectOutcome draw_multi(const EffectModel& em, const SubjectCovariates& sc,
                          double lambda, const InfusionSchedule& s, double u);

}  // namespace cycsurv
