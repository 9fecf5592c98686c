#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cycsurv {

// Self-checks comparing the closed-form generators against the quadrature
// oracle.  These back the `verify` CLI subcommand and the acceptance suite.

struct OracleCheck {
  int points = 0;           // finite (closed, oracle) pairs compared
  double max_abs_err = 0.0; // days
  int censor_mismatches = 0;
};

// Sweeps a battery of configurations (exponential / Weibull / Gompertz
// single-dose draws; whole-trajectory multiple-dose draws on regular,
// irregular and long-gap schedules) with points_per_config hazard-space grid
// points each, inverting every point both in closed form and through the
// oracle.
OracleCheck oracle_grid_check(int points_per_config);

struct PullbackCheck {
  std::string name;
  std::size_t n = 0;
  double d = 0.0;         // KS distance of H(T) against Exp(1)
  double critical = 0.0;  // alpha = 0.01 threshold
  bool pass = false;
};

// H(T) must be unit-exponential when T comes from the matching generator.
std::vector<PullbackCheck> pullback_checks(std::size_t n, std::uint64_t seed);

struct ContinuityCheck {
  std::string name;
  double max_gap = 0.0;  // days, across the probed analytic boundary
};

// Generator output as a function of cumulative hazard must be continuous
// across branch switches (protection threshold) and segment boundaries
// (infusions); probes each boundary from both sides.
std::vector<ContinuityCheck> continuity_checks();

struct TwoSampleCheck {
  std::size_t n = 0, m = 0;
  double d = 0.0;
  double critical = 0.0;
  bool pass = false;
};

// The per-gap aggregation and the whole-trajectory inversion must produce
// the same outcome distribution under identical parameters.
TwoSampleCheck cross_approach_check(std::size_t n, std::uint64_t seed);

}  // namespace cycsurv
