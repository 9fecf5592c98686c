#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cycsurv {

// Stream derivation for reproducible simulations.  Every subject gets its own
// generator seeded from (master_seed, trial_index, subject_index), so results
// do not depend on scheduling order and trials can run on any number of
// threads without changing output.
//
// All variate generation in this library goes through the helpers below
// rather than <random> distributions, whose output is implementation-defined.
// std::mt19937_64 itself is fully specified by the standard, so a given seed
// produces the same stream on every platform.

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master_seed,
                                 std::uint64_t trial_index,
                                 std::uint64_t subject_index) {
  return splitmix64(splitmix64(splitmix64(master_seed) ^ trial_index) ^
                    subject_index);
}

inline std::mt19937_64 subject_stream(std::uint64_t master_seed,
                                      std::uint64_t trial_index,
                                      std::uint64_t subject_index) {
  return std::mt19937_64(derive_seed(master_seed, trial_index, subject_index));
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on the open interval (0, 1).  Endpoints are nudged away by one ulp
// so that -log(u) and log(1 - u) are always finite.
inline double uniform_open01(std::mt19937_64& rng) {
  double u = uniform01(rng);
  if (u <= 0.0) return 0x1.0p-53;
  return u;  // uniform01 never returns 1.0
}

// Standard normal via Box-Muller; consumes exactly two uniforms.
inline double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform_open01(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace cycsurv
