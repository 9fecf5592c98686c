#include "cycsurv/hazard.hpp"

#include <cmath>
#include <stdexcept>

namespace cycsurv {

namespace {

void check_rate(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("baseline rate must be positive and finite");
  }
}

}  // namespace

BaselineHazard BaselineHazard::exponential(double lambda) {
  check_rate(lambda);
  return {Family::Exponential, lambda, 0.0};
}

BaselineHazard BaselineHazard::weibull(double lambda, double gamma) {
  check_rate(lambda);
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("Weibull shape must be positive and finite");
  }
  return {Family::Weibull, lambda, gamma};
}

BaselineHazard BaselineHazard::gompertz(double lambda, double alpha) {
  check_rate(lambda);
  if (!std::isfinite(alpha)) {
    throw std::invalid_argument("Gompertz shape must be finite");
  }
  return {Family::Gompertz, lambda, alpha};
}

double hazard_at(const BaselineHazard& b, double t) {
  if (!(t >= 0.0)) {
    throw std::domain_error("hazard_at: t must be >= 0");
  }
  switch (b.family) {
    case BaselineHazard::Family::Exponential:
      return b.rate;
    case BaselineHazard::Family::Weibull:
      if (t == 0.0) {
        if (b.shape < 1.0) {
          throw std::domain_error("Weibull hazard diverges at t = 0 for shape < 1");
        }
        return b.shape == 1.0 ? b.rate : 0.0;
      }
      return b.rate * b.shape * std::pow(t, b.shape - 1.0);
    case BaselineHazard::Family::Gompertz:
      return b.rate * std::exp(b.shape * t);
  }
  throw std::logic_error("unreachable hazard family");
}

double cumulative_baseline(const BaselineHazard& b, double t) {
  if (!(t >= 0.0)) {
    throw std::domain_error("cumulative_baseline: t must be >= 0");
  }
  switch (b.family) {
    case BaselineHazard::Family::Exponential:
      return b.rate * t;
    case BaselineHazard::Family::Weibull:
      return b.rate * std::pow(t, b.shape);
    case BaselineHazard::Family::Gompertz:
      if (std::abs(b.shape) < kShapeZeroTol) {
        return b.rate * t;
      }
      return b.rate / b.shape * std::expm1(b.shape * t);
  }
  throw std::logic_error("unreachable hazard family");
}

}  // namespace cycsurv
