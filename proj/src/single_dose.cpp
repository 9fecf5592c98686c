#include "cycsurv/single_dose.hpp"

#include <cmath>
#include <stdexcept>

#include "cycsurv/hazard.hpp"

namespace cycsurv {

namespace {

double neg_log(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("u must lie strictly inside (0, 1)");
  }
  return -std::log(u);
}

void check_rate(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("rate must be positive and finite");
  }
}

// Shared inversion for hazards of the form scale * exp(slope * min(t, t_s)):
// the exponential baseline directly (slope = beta), and the Gompertz baseline
// exp(alpha * t), which just shifts the slope to beta + alpha.  The growing
// branch integrates to scale * expm1(slope * t) / slope; past the threshold
// the hazard is flat at scale * exp(slope * t_s).
SingleDoseDraw invert_flat_family(double scale, double slope, double t_s,
                                  double v) {
  if (std::abs(slope) < kShapeZeroTol) {
    // Removable singularity: the hazard is constant throughout.
    const double t = v / scale;
    return {t, t < t_s};
  }
  const double boundary = scale * std::expm1(slope * t_s) / slope;
  if (v < boundary) {
    return {std::log1p(slope * v / scale) / slope, true};
  }
  return {t_s + (v - boundary) / (scale * std::exp(slope * t_s)), false};
}

}  // namespace

double growth_integral(double gamma, double beta, double t) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("growth_integral: gamma must be positive");
  }
  if (!(t >= 0.0)) {
    throw std::domain_error("growth_integral: t must be >= 0");
  }
  if (t == 0.0) return 0.0;
  // sum_j beta^j t^(gamma+j) / (j! (gamma+j)); consecutive terms are related
  // by a_j = a_{j-1} * beta * t * (gamma+j-1) / (j * (gamma+j)).
  double term = std::pow(t, gamma) / gamma;
  double sum = term;
  for (int j = 1; j < 400; ++j) {
    term *= beta * t * (gamma + j - 1.0) / (j * (gamma + j));
    sum += term;
    if (std::abs(term) < 1e-14 * std::abs(sum)) {
      return sum;
    }
  }
  throw std::runtime_error("growth_integral: series did not converge");
}

SingleDoseDraw draw_exponential(const EffectModel& em,
                                const SubjectCovariates& sc, double lambda,
                                double u) {
  em.validate();
  check_rate(lambda);
  const double v = neg_log(u);
  const double scale = lambda * std::exp(linear_predictor(em, sc));
  return invert_flat_family(scale, em.beta, em.threshold_days, v);
}

SingleDoseDraw draw_gompertz(const EffectModel& em, const SubjectCovariates& sc,
                             double lambda, double alpha, double u) {
  em.validate();
  check_rate(lambda);
  if (!std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be finite");
  }
  const double v = neg_log(u);
  const double scale = lambda * std::exp(linear_predictor(em, sc));
  return invert_flat_family(scale, em.beta + alpha, em.threshold_days, v);
}

SingleDoseDraw draw_weibull(const EffectModel& em, const SubjectCovariates& sc,
                            double lambda, double gamma, double u) {
  em.validate();
  check_rate(lambda);
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("gamma must be positive and finite");
  }
  const double v = neg_log(u);
  const double ex = std::exp(linear_predictor(em, sc));
  const double t_s = em.threshold_days;
  const double beta = em.beta;

  if (std::abs(beta) < kShapeZeroTol) {
    // Plain Weibull: H(t) = lambda * ex * t^gamma.
    const double t = std::pow(v / (lambda * ex), 1.0 / gamma);
    return {t, t < t_s};
  }

  // H(t) = lambda * gamma * ex * G(t) on the growing branch, with
  // G = growth_integral; past t_s the hazard is flat at
  // lambda * gamma * t_s^(gamma-1) * exp(beta * t_s) * ex.
  const double g_target = v / (lambda * gamma * ex);
  const double g_ts = growth_integral(gamma, beta, t_s);
  if (g_target >= g_ts) {
    const double flat = std::pow(t_s, gamma - 1.0) * std::exp(beta * t_s);
    return {t_s + (g_target - g_ts) / flat, false};
  }

  // Invert G on (0, t_s): safeguarded Newton with G'(t) = t^(gamma-1) e^(beta t).
  // Start from the beta = 0 inverse, which is exact up to the tilt.
  double lo = 0.0, hi = t_s;
  double t = std::min(hi, std::pow(gamma * g_target, 1.0 / gamma));
  if (!(t > lo)) t = 0.5 * hi;
  for (int iter = 0; iter < 200; ++iter) {
    const double f = growth_integral(gamma, beta, t) - g_target;
    if (f > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    if (std::abs(f) <= 1e-15 * g_target || hi - lo <= 1e-13 * t_s) {
      return {t, true};
    }
    const double deriv = std::pow(t, gamma - 1.0) * std::exp(beta * t);
    double next = t - f / deriv;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);  // Newton left the bracket; bisect instead
    }
    t = next;
  }
  throw std::runtime_error("draw_weibull: inversion did not converge");
}

}  // namespace cycsurv
