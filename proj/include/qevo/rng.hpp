#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace qevo {

/// The engine's only source of randomness. The std distributions are
/// implementation-defined, so the helpers below derive every draw directly
/// from the raw 64-bit stream; runs replay identically across toolchains.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound). bound must be positive.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound + 1) % bound;
  std::uint64_t x = rng();
  while (x > limit) x = rng();
  return x % bound;
}

/// Uniform real in [0, 1) with 53 bits of precision.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

/// Exponential variate with the given mean.
inline double exponential(Rng& rng, double mean) {
  return -mean * std::log1p(-uniform01(rng));
}

/// Index drawn proportionally to a cumulative weight table (last entry = total).
inline std::size_t sample_cumulative(Rng& rng, std::span<const double> cumulative) {
  const double target = uniform01(rng) * cumulative.back();
  std::size_t lo = 0;
  std::size_t hi = cumulative.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cumulative[mid] > target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

std::string save_rng(const Rng& rng);
Rng load_rng(const std::string& state);

}  // namespace qevo
