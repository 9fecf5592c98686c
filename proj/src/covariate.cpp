#include "cycsurv/covariate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cycsurv {

void EffectModel::validate() const {
  if (!(threshold_days > 0.0) || !std::isfinite(threshold_days)) {
    throw std::invalid_argument("threshold_days must be positive and finite");
  }
  if (!std::isfinite(beta)) {
    throw std::invalid_argument("beta must be finite");
  }
  if (!eta.allFinite()) {
    throw std::invalid_argument("eta must be finite");
  }
}

double z_within_cycle(const EffectModel& em, double tau) {
  if (!(tau >= 0.0)) {
    throw std::domain_error("z_within_cycle: tau must be >= 0");
  }
  return std::min(tau, em.threshold_days);
}

double z_global(const EffectModel& em, const InfusionSchedule& s, double t) {
  if (!(t >= 0.0)) {
    throw std::domain_error("z_global: t must be >= 0");
  }
  // Most recent infusion at or before t; times are sorted with times[0] == 0.
  auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
  const double last = *(it - 1);
  return z_within_cycle(em, t - last);
}

double linear_predictor(const EffectModel& em, const SubjectCovariates& sc) {
  if (em.eta.size() != sc.x.size()) {
    throw std::invalid_argument("covariate length does not match eta");
  }
  if (em.eta.size() == 0) return 0.0;
  return em.eta.dot(sc.x);
}

double calibrate_lambda(double lambda_placebo, const EffectModel& em) {
  if (!(lambda_placebo > 0.0) || !std::isfinite(lambda_placebo)) {
    throw std::invalid_argument("lambda_placebo must be positive and finite");
  }
  em.validate();
  return lambda_placebo * std::exp(-em.beta * em.threshold_days);
}

std::optional<double> dose_threshold_days(double dose_mg_per_kg) {
  if (dose_mg_per_kg == 10.0) return 57.0;
  if (dose_mg_per_kg == 30.0) return 81.0;
  return std::nullopt;
}

}  // namespace cycsurv
