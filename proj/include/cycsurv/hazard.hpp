#pragma once

namespace cycsurv {

// Baseline hazard h0(t) for the supported parametric families.  Time is in
// days throughout the library; `rate` is per day.
//
//   Exponential: h0(t) = rate
//   Weibull:     h0(t) = rate * shape * t^(shape-1)
//   Gompertz:    h0(t) = rate * exp(shape * t)
struct BaselineHazard {
  enum class Family { Exponential, Weibull, Gompertz };

  Family family = Family::Exponential;
  double rate = 0.0;   // lambda > 0, per day
  double shape = 0.0;  // Weibull: gamma > 0; Gompertz: alpha (any sign)

  static BaselineHazard exponential(double lambda);
  static BaselineHazard weibull(double lambda, double gamma);
  static BaselineHazard gompertz(double lambda, double alpha);
};

// Shape parameters (and per-cycle log-hazard slopes) whose magnitude falls
// below this are treated as exactly zero, switching formulas with a removable
// singularity to their analytic limits instead of dividing by a tiny number.
inline constexpr double kShapeZeroTol = 1e-10;

// h0(t), t >= 0.  Throws std::domain_error for t < 0 and for the Weibull
// pole at t = 0 when gamma < 1.
double hazard_at(const BaselineHazard& b, double t);

// H0(t) = integral of h0 over [0, t].  Closed form per family; the Gompertz
// case uses the alpha -> 0 limit (rate * t) below kShapeZeroTol.
double cumulative_baseline(const BaselineHazard& b, double t);

}  // namespace cycsurv
