#pragma once

#include <random>

#include "cycsurv/covariate.hpp"
#include "cycsurv/rng.hpp"
#include "cycsurv/schedule.hpp"

namespace cycsurv {

// Event time after one infusion, by inverting the cumulative hazard at
// v = -log(u).  The hazard grows with z(t) = min(t, t_s) until the threshold
// and is flat beyond it, so each draw lands either on the growing branch
// (time <= t_s) or the flat one; `pre_threshold` records which.  Draws are
// always finite: the flat branch extends to infinity.
struct SingleDoseDraw {
  double time = 0.0;  // days since the infusion
  bool pre_threshold = false;
};

// h0 = lambda (constant).  Closed form in both branches.
SingleDoseDraw draw_exponential(const EffectModel& em,
                                const SubjectCovariates& sc, double lambda,
                                double u);

// h0 = lambda * gamma * t^(gamma-1).  The growing branch has no elementary
// inverse; it is solved numerically via growth_integral below.
SingleDoseDraw draw_weibull(const EffectModel& em, const SubjectCovariates& sc,
                            double lambda, double gamma, double u);

// h0 = lambda * exp(alpha * t).  Identical in form to the exponential case
// with slope beta + alpha; |beta + alpha| < kShapeZeroTol falls back to the
// linear limit.
SingleDoseDraw draw_gompertz(const EffectModel& em, const SubjectCovariates& sc,
                             double lambda, double alpha, double u);

// integral of v^(gamma-1) * exp(beta*v) dv over [0, t], evaluated as the
// power series sum_j beta^j t^(gamma+j) / (j! (gamma+j)) truncated when the
// relative term drops below 1e-14.  Accurate for |beta * t| up to roughly 20;
// the library only needs it on [0, threshold_days].
double growth_integral(double gamma, double beta, double t);

// Event or censoring time for one subject over a full schedule.
struct SubjectOutcome {
  double time = 0.0;        // days since first infusion
  bool event = false;       // false => censored at study_end
  int interval_index = -1;  // 0-based interval that produced the event
};

// Builds a full-schedule outcome from independent single-dose draws: for each
// gap I_k between infusions, draw a fresh single-dose time T_k; the first
// draw with T_k strictly inside its gap is the event, offset by the gap's
// start.  A draw landing exactly on the gap boundary does not count (the next
// infusion arrives first).  If every draw outlasts its gap the subject is
// censored at study_end.  DrawFn maps a uniform u in (0,1) to a
// SingleDoseDraw; one uniform is consumed per gap until the event.
template <class DrawFn>
SubjectOutcome aggregate_multidose(const InfusionSchedule& s, DrawFn&& draw,
                                   std::mt19937_64& rng) {
  s.validate();
  const std::vector<double> gaps = intervals(s);
  double elapsed = 0.0;
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    const SingleDoseDraw d = draw(uniform_open01(rng));
    if (d.time < gaps[k]) {
      return {elapsed + d.time, true, static_cast<int>(k)};
    }
    elapsed += gaps[k];
  }
  return {s.study_end, false, -1};
}

}  // namespace cycsurv
