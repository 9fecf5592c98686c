#include "cycsurv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cycsurv {

namespace {

// 15-point Kronrod extension of 7-point Gauss on [-1, 1].  All nodes are
// interior, so integrable endpoint singularities (the Weibull gamma < 1 pole
// at a cycle start) are never evaluated directly.
constexpr int kNodes = 15;
constexpr double kX[kNodes] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double kWK[kNodes] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
// Gauss weights attach to every second Kronrod node (indices 1,3,...,13).
constexpr double kWG[7] = {0.129484966168870, 0.279705391489277,
                           0.381830050505119, 0.417959183673469,
                           0.381830050505119, 0.279705391489277,
                           0.129484966168870};

template <class F>
void gauss_kronrod(const F& f, double a, double b, double& value,
                   double& error) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double k15 = 0.0, g7 = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    const double y = f(c + h * kX[i]);
    k15 += kWK[i] * y;
    if (i % 2 == 1) g7 += kWG[i / 2] * y;
  }
  value = h * k15;
  error = std::abs(h * (k15 - g7));
}

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Bisect until the local Kronrod-Gauss error estimate meets the (halving)
// tolerance.  At the depth or width floor the piece is accepted as is and its
// error estimate carried upward: near an integrable singularity the estimate
// never beats the shrinking tolerance, but by then the absolute contribution
// is negligible.  The caller checks the accumulated error instead.
template <class F>
QuadResult adaptive_quad(const F& f, double a, double b, double tol,
                         int depth) {
  QuadResult r;
  gauss_kronrod(f, a, b, r.value, r.error);
  // An error estimate at the rounding floor of the panel value is noise, not
  // signal: the Kronrod/Gauss weight sums differ by a few ulp, so a constant
  // integrand on a wide panel reports error ~ width * |f| * 1e-15.  Splitting
  // halves that together with the tolerance and never terminates.
  if (r.error <= tol || r.error <= 1e-14 * std::abs(r.value) || depth <= 0 ||
      b - a < 1e-14 * (1.0 + std::abs(a))) {
    return r;
  }
  const double c = 0.5 * (a + b);
  const QuadResult left = adaptive_quad(f, a, c, 0.5 * tol, depth - 1);
  const QuadResult right = adaptive_quad(f, c, b, 0.5 * tol, depth - 1);
  return {left.value + right.value, left.error + right.error};
}

constexpr double kPieceTol = 1e-12;
// A piece whose accumulated error estimate exceeds this failed to converge.
constexpr double kPieceErrorBudget = 1e-8;

}  // namespace

HazardPath::HazardPath(const BaselineHazard& baseline, const EffectModel& effect,
                       const SubjectCovariates& covariates,
                       const InfusionSchedule& schedule)
    : baseline_(baseline), effect_(effect), schedule_(schedule) {
  effect_.validate();
  schedule_.validate();
  eta_x_ = linear_predictor(effect_, covariates);

  // Breakpoints: every infusion and every protection-threshold crossing,
  // plus study_end.  Points that fall inside a later cycle are not kinks but
  // splitting a smooth piece is harmless.  Crossings past study_end are
  // dropped; nothing after the administrative end is ever integrated ahead
  // of time.
  breaks_.push_back(0.0);
  for (double t : schedule_.times) {
    breaks_.push_back(t);
    const double crossing = t + effect_.threshold_days;
    if (crossing < schedule_.study_end) breaks_.push_back(crossing);
  }
  breaks_.push_back(schedule_.study_end);
  std::sort(breaks_.begin(), breaks_.end());
  breaks_.erase(std::unique(breaks_.begin(), breaks_.end(),
                            [](double a, double b) { return b - a < 1e-9; }),
                breaks_.end());

  cum_at_.resize(breaks_.size());
  cum_at_[0] = 0.0;
  for (std::size_t i = 1; i < breaks_.size(); ++i) {
    cum_at_[i] = cum_at_[i - 1] + piece_integral(breaks_[i - 1], breaks_[i]);
  }
  h_end_ = cumulative_hazard(schedule_.study_end);
}

double HazardPath::hazard(double t) const {
  if (!(t >= 0.0)) {
    throw std::domain_error("HazardPath::hazard: t must be >= 0");
  }
  const auto& times = schedule_.times;
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const double tau = t - *(it - 1);
  const double zc = std::min(tau, effect_.threshold_days);
  return hazard_at(baseline_, zc) * std::exp(effect_.beta * zc + eta_x_);
}

double HazardPath::piece_integral(double lo, double hi) const {
  if (hi <= lo) return 0.0;
  const QuadResult r = adaptive_quad([this](double t) { return hazard(t); },
                                     lo, hi, kPieceTol, 48);
  if (!(r.error <= kPieceErrorBudget) || !std::isfinite(r.value)) {
    throw std::runtime_error("oracle quadrature did not converge");
  }
  return r.value;
}

double HazardPath::cumulative_hazard(double t) const {
  if (!(t >= 0.0)) {
    throw std::domain_error("HazardPath::cumulative_hazard: t must be >= 0");
  }
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  if (it == breaks_.begin()) return 0.0;
  const std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
  return cum_at_[i] + piece_integral(breaks_[i], t);
}

double HazardPath::invert(double target) const {
  if (!(target >= 0.0)) {
    throw std::invalid_argument("HazardPath::invert: target must be >= 0");
  }
  if (target == 0.0) return 0.0;

  if (target > h_end_) return kCensored;

  // Piece containing the target, then safeguarded Newton inside it.
  const auto it = std::lower_bound(cum_at_.begin(), cum_at_.end(), target);
  const std::size_t i = static_cast<std::size_t>(it - cum_at_.begin());
  double lo = breaks_[i - 1], hi = breaks_[i];
  const double want = target - cum_at_[i - 1];  // mass to absorb past lo
  const double piece_lo = lo;

  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = piece_integral(piece_lo, t) - want;
    if (f > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    // 1e-12 in H keeps the time error well under 1e-6 days even at the
    // low per-day rates this library works with (dt = dH / h).
    if (std::abs(f) <= 1e-12 || hi - lo <= 1e-12 * (1.0 + hi)) {
      return t;
    }
    double next = t - f / hazard(t);
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    t = next;
  }
  throw std::runtime_error("HazardPath::invert did not converge");
}

}  // namespace cycsurv
