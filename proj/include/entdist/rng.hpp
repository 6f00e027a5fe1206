#pragma once

#include <cmath>
#include <cstdint>

namespace entdist {

// Counter-based pseudo-random stream (splitmix64 core).
//
// A stream is keyed by (seed, slice, stream_id). Output n is a pure function
// of (key, n), so independent slices of a simulation can draw from their own
// substreams in any order — including concurrently — and still produce
// bit-identical results for a fixed seed. This is the backbone of the
// deterministic parallel event simulation.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t slice = 0, std::uint64_t stream_id = 0)
      : state_(derive_key(seed, slice, stream_id)) {}

  // Raw 64 uniform bits.
  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return finalize(state_);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Exponential with the given rate (events per unit time). rate > 0.
  double exponential(double rate) {
    // 1 - uniform01() lies in (0, 1], so the log is finite.
    return -std::log1p(-uniform01()) / rate;
  }

  // Standard normal via Marsaglia's polar method (one value cached).
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * m;
    has_cached_ = true;
    return u * m;
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t slice, std::uint64_t stream_id) {
    std::uint64_t k = finalize(seed + 0x9E3779B97F4A7C15ull);
    k = finalize(k ^ (slice + 0xBF58476D1CE4E5B9ull));
    k = finalize(k ^ (stream_id + 0x94D049BB133111EBull));
    return k;
  }

  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace entdist
