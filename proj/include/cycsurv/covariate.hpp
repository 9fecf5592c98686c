#pragma once

#include <Eigen/Dense>
#include <optional>

#include "cycsurv/schedule.hpp"

namespace cycsurv {

// Proportional-hazards effect specification.  The time-varying covariate is
// z(t) = min(time since the most recent infusion, threshold_days): time since
// dose tracks the decay of drug concentration, and past threshold_days the
// concentration has dropped below the level s at which it still offers any
// protection, so the covariate stops growing.  The full hazard is
//
//   h(t | x) = h0(t) * exp(beta * z(t) + eta' x)
//
// with x a vector of fixed subject covariates.
struct EffectModel {
  double beta = 0.0;            // log-hazard slope per day of z
  Eigen::VectorXd eta;          // coefficients for fixed covariates (may be empty)
  double threshold_days = 0.0;  // t_s > 0, days until protection is exhausted
  double threshold_conc = 0.0;  // matching concentration s (informational)

  void validate() const;
};

struct SubjectCovariates {
  Eigen::VectorXd x;  // length must match eta
};

// z as a function of time tau since the covering infusion.
double z_within_cycle(const EffectModel& em, double tau);

// z at absolute time t given a realized schedule: locates the most recent
// infusion at or before t and clamps the elapsed time at threshold_days.
double z_global(const EffectModel& em, const InfusionSchedule& s, double t);

// eta' x (0 when there are no fixed covariates).  Throws on length mismatch.
double linear_predictor(const EffectModel& em, const SubjectCovariates& sc);

// Treated-arm rate lambda such that the hazard at the moment protection runs
// out, lambda * exp(beta * threshold_days), equals the placebo rate:
// lambda = lambda_placebo * exp(-beta * threshold_days).
double calibrate_lambda(double lambda_placebo, const EffectModel& em);

// Protection duration for the dose levels with published concentration decay
// profiles (10 mg/kg -> 57 d, 30 mg/kg -> 81 d); empty for other doses.
std::optional<double> dose_threshold_days(double dose_mg_per_kg);

}  // namespace cycsurv
