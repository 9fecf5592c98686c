#include "cycsurv/schedule.hpp"

#include <cmath>
#include <stdexcept>

#include "cycsurv/rng.hpp"

namespace cycsurv {

void InfusionSchedule::validate() const {
  if (times.empty() || times.front() != 0.0) {
    throw std::invalid_argument("schedule must start with an infusion at 0");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("infusion times must be strictly increasing");
    }
  }
  if (!(study_end >= times.back()) || !std::isfinite(study_end)) {
    throw std::invalid_argument("study_end must be finite and >= last infusion");
  }
}

void AdherenceConfig::validate() const {
  if (!(miss_prob >= 0.0 && miss_prob < 1.0)) {
    throw std::invalid_argument("miss_prob must lie in [0, 1)");
  }
  if (!(discontinue_prob >= 0.0 && discontinue_prob < 1.0)) {
    throw std::invalid_argument("discontinue_prob must lie in [0, 1)");
  }
  if (!(window_low <= 0.0) || !(window_high >= 0.0)) {
    throw std::invalid_argument("visit window must satisfy low <= 0 <= high");
  }
  if (!(target_interval > 0.0)) {
    throw std::invalid_argument("target_interval must be positive");
  }
  if (window_high - window_low > target_interval) {
    // Wider windows could reorder visits; keep schedules strictly increasing.
    throw std::invalid_argument("visit window must not be wider than the target interval");
  }
}

InfusionSchedule generate_schedule(const AdherenceConfig& cfg,
                                   int max_infusions, double study_end,
                                   std::mt19937_64& rng) {
  cfg.validate();
  if (max_infusions < 1) {
    throw std::invalid_argument("max_infusions must be >= 1");
  }
  if (!(study_end > 0.0) || !std::isfinite(study_end)) {
    throw std::invalid_argument("study_end must be positive and finite");
  }

  InfusionSchedule s;
  s.study_end = study_end;
  s.times.push_back(0.0);
  for (int k = 2; k <= max_infusions; ++k) {
    // Fixed draw order per visit slot keeps streams aligned across configs.
    const double jitter =
        cfg.window_low + uniform01(rng) * (cfg.window_high - cfg.window_low);
    const bool missed = uniform01(rng) < cfg.miss_prob;
    const bool discontinued = uniform01(rng) < cfg.discontinue_prob;
    if (discontinued) break;
    if (missed) continue;
    const double t = (k - 1) * cfg.target_interval + jitter;
    if (t >= study_end) continue;  // trial is over before this visit
    if (t <= s.times.back()) continue;  // window-edge collision (measure zero)
    s.times.push_back(t);
  }
  s.validate();
  return s;
}

std::vector<double> intervals(const InfusionSchedule& s) {
  s.validate();
  std::vector<double> gaps;
  gaps.reserve(s.times.size());
  for (std::size_t i = 1; i < s.times.size(); ++i) {
    gaps.push_back(s.times[i] - s.times[i - 1]);
  }
  gaps.push_back(s.study_end - s.times.back());
  return gaps;
}

}  // namespace cycsurv
