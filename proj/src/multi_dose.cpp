#include "cycsurv/multi_dose.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cycsurv/hazard.hpp"

namespace cycsurv {

namespace {

// Hazard contribution of one inter-infusion gap of length `len`:
// an exponential ramp over min(len, t_s) plus a flat tail beyond it.
double gap_hazard(double scale, double beta, double t_s, double len) {
  const double ramp_len = std::min(len, t_s);
  const double ramp = std::abs(beta) < kShapeZeroTol
                          ? scale * ramp_len
                          : scale * std::expm1(beta * ramp_len) / beta;
  const double tail =
      len > t_s ? scale * std::exp(beta * t_s) * (len - t_s) : 0.0;
  return ramp + tail;
}

}  // namespace

SegmentBounds segment_bounds(const EffectModel& em, const SubjectCovariates& sc,
                             double lambda, const InfusionSchedule& s) {
  em.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("rate must be positive and finite");
  }
  const double scale = lambda * std::exp(linear_predictor(em, sc));
  const std::vector<double> gaps = intervals(s);

  SegmentBounds b;
  b.lower.reserve(gaps.size());
  b.upper.reserve(gaps.size());
  double acc = 0.0;
  for (double len : gaps) {
    b.lower.push_back(acc);
    acc += gap_hazard(scale, em.beta, em.threshold_days, len);
    b.upper.push_back(acc);
  }
  return b;
}

SubjectOutcome draw_multi(const EffectModel& em, const SubjectCovariates& sc,
                          double lambda, const InfusionSchedule& s, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("u must lie strictly inside (0, 1)");
  }
  const double v = -std::log(u);
  const SegmentBounds b = segment_bounds(em, sc, lambda, s);
  const auto it = std::upper_bound(b.upper.begin(), b.upper.end(), v);
  if (it == b.upper.end()) {
    return {s.study_end, false, -1};
  }
  const std::size_t k = static_cast<std::size_t>(it - b.upper.begin());

  const double scale = lambda * std::exp(linear_predictor(em, sc));
  const double beta = em.beta;
  const double t_s = em.threshold_days;
  const double t_k = s.times[k];
  const double gap_end =
      (k + 1 < s.times.size()) ? s.times[k + 1] : s.study_end;
  const double len = gap_end - t_k;
  const double w = v - b.lower[k];  // hazard still to absorb within this gap

  double local;
  if (std::abs(beta) < kShapeZeroTol) {
    local = w / scale;
  } else {
    const double ramp = gap_hazard(scale, beta, t_s, std::min(len, t_s));
    if (w < ramp) {
      local = std::log1p(beta * w / scale) / beta;
    } else {
      local = t_s + (w - ramp) / (scale * std::exp(beta * t_s));
    }
  }

  const double t = t_k + local;
  if (!(local >= 0.0) || t > gap_end + 1e-9 * (1.0 + gap_end)) {
    throw std::logic_error("draw_multi: inverted time left its gap");
  }
  return {std::min(t, gap_end), true, static_cast<int>(k)};
}

}  // namespace cycsurv
