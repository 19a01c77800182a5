#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "horizon/linalg.hpp"

namespace horizon {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic per-replica random stream. Streams derived from the same
/// (master_seed, replica) pair are identical regardless of scheduling, which
/// is what makes multi-threaded batches reproducible byte-for-byte.
class RngStream {
 public:
  RngStream() : gen_(0) {}
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  static RngStream for_replica(std::uint64_t master_seed, std::uint64_t replica) {
    const std::uint64_t mixed = splitmix64(splitmix64(master_seed) ^ splitmix64(replica + 0x1CEB00DAULL));
    return RngStream(mixed);
  }

  std::uint64_t raw() { return gen_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (fixed two-uniform consumption per pair).
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  /// Exponential with the given mean.
  double exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

  /// Uniform integer in {0, ..., n-1}.
  int uniform_index(int n) {
    const int k = static_cast<int>(uniform() * n);
    return k >= n ? n - 1 : k;
  }

 private:
  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace horizon
