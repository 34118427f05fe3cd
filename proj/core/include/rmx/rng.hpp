// rng.hpp: deterministic random streams for the ensemble engine.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace rmx {

/// splitmix64 step: advances `state` and returns a well-mixed 64-bit value.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derives the stream seed for realization `index` from a master seed.
/// Distinct (master, index) pairs map to distinct, decorrelated seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64_next(s);
  s = a ^ (0x9e3779b97f4a7c15ull * (index + 1));
  return splitmix64_next(s);
}

/// Gaussian stream: splitmix64 + Box-Muller.
/// std::normal_distribution is implementation-defined, so a fixed transform is
/// used to keep ensemble means bitwise reproducible across toolchains.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : state_(seed) {}

  /// Uniform double in (0,1]; strictly positive so log() is safe.
  double uniform() {
    return (static_cast<double>(splitmix64_next(state_) >> 11) + 1.0) * 0x1p-53;
  }

  /// Standard normal variate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 6.283185307179586476925286766559 * u2;
    spare_ = rad * std::sin(ang);
    have_spare_ = true;
    return rad * std::cos(ang);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rmx
