#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ownrecon {

/// Seeded generator used for every random draw in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The distributions are written out here instead of using
/// std::*_distribution, whose algorithms are implementation-defined, so that
/// masks, noise, phantoms and weights are identical across toolchains:
///   uniform01  : top 53 bits of one draw, scaled to [0, 1)
///   index(n)   : rejection sampling on the raw 64-bit draw (no modulo bias)
///   gaussian   : Box-Muller, both outputs used in order
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ownrecon
