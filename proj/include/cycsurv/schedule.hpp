#pragma once

#include <random>
#include <vector>

namespace cycsurv {

// A subject's realized infusion schedule.  Times are days since the first
// infusion, which is always at 0; follow-up ends at study_end.
struct InfusionSchedule {
  std::vector<double> times;  // strictly increasing, times[0] == 0
  double study_end = 0.0;     // >= times.back()

  // Throws std::invalid_argument if the invariants above are violated.
  void validate() const;
};

// Deviations from the nominal every-`target_interval` grid.  Visit k > 1 is
// placed at (k-1)*target_interval plus a uniform jitter from
// [window_low, window_high]; it is skipped with probability miss_prob; and
// with probability discontinue_prob the subject stops attending from that
// visit on.  Missed visits are simply absent -- later visits stay on their
// own nominal slots.
struct AdherenceConfig {
  double miss_prob = 0.0;         // in [0, 1)
  double window_low = 0.0;        // days, <= 0
  double window_high = 0.0;       // days, >= 0
  double discontinue_prob = 0.0;  // in [0, 1)
  double target_interval = 56.0;  // days between nominal visits, > 0

  void validate() const;
};

// Realizes one schedule.  The first infusion is always given at time 0; at
// most max_infusions infusions occur; a visit whose jittered time lands at or
// beyond study_end is not given.  Consumes three uniforms per later visit
// slot (jitter, miss, discontinuation -- in that order) so that a fixed seed
// yields the same schedule no matter which deviations are switched off; with
// miss_prob = 0, discontinue_prob = 0 and a zero-width window the result is
// the deterministic nominal grid.
InfusionSchedule generate_schedule(const AdherenceConfig& cfg,
                                   int max_infusions, double study_end,
                                   std::mt19937_64& rng);

// Gap lengths I_k between consecutive infusions, with the last entry running
// to study_end.  Their sum is exactly study_end.
std::vector<double> intervals(const InfusionSchedule& s);

}  // namespace cycsurv
