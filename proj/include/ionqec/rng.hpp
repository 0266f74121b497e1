#pragma once

#include <cmath>
#include <cstdint>

#include "ionqec/common.hpp"

namespace ionqec {

// Counter-based substream RNG. A substream is keyed by (master seed, up to
// three indices); streams with different keys are statistically independent,
// so Monte-Carlo samples can be evaluated on any thread in any order while
// producing identical results. Generator is xoshiro256++ seeded through
// splitmix64; all distributions below are hand-rolled so sequences are
// identical across platforms and standard libraries.

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// stateless mix of a single word
inline uint64_t mix64(uint64_t x) {
  return splitmix64(x);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) { init(seed); }
  Rng(uint64_t master, uint64_t i0, uint64_t i1 = 0, uint64_t i2 = 0) {
    uint64_t s = master;
    s = splitmix64(s) ^ (i0 * 0xd6e8feb86659fd93ULL);
    s = splitmix64(s) ^ (i1 * 0xa3b195354a39b70dULL);
    s = splitmix64(s) ^ (i2 * 0x1b03738712fad5c9ULL);
    init(splitmix64(s));
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in (0, 1].
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
  }

  // Standard normal via Box-Muller; caches the second deviate.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = kTwoPi * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Integer in [0, n).
  uint64_t below(uint64_t n) { return next_u64() % n; }

 private:
  void init(uint64_t seed) {
    uint64_t s = seed;
    for (auto& w : s_) w = splitmix64(s);
  }
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace ionqec
