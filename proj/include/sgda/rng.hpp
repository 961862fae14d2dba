#pragma once

// Counter-based random numbers. A draw is a pure function of
// (seed, epoch, step, stream, index), so any mini-batch can be regenerated
// without replaying the ones before it.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sgda {

namespace streams {
inline constexpr std::uint64_t estimator = 0;
inline constexpr std::uint64_t output = 1;
inline constexpr std::uint64_t multistart = 2;
inline constexpr std::uint64_t monte_carlo = 3;
inline constexpr std::uint64_t instance = 4;
}  // namespace streams

struct BatchKey {
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::uint64_t step = 0;
  std::uint64_t stream = streams::estimator;
};

// splitmix64 finalizer
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t counter_hash(const BatchKey& key, std::uint64_t index) {
  std::uint64_t h = mix64(key.seed);
  h = mix64(h ^ key.stream);
  h = mix64(h ^ key.epoch);
  h = mix64(h ^ key.step);
  return mix64(h ^ index);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline constexpr double unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) (multiply-high reduction; bias below 2^-40 for n < 2^24).
inline std::uint64_t bounded(std::uint64_t bits, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits) * n) >> 64);
}

/// Standard normal from two independent words (Box-Muller).
inline double normal_from(std::uint64_t a, std::uint64_t b) {
  const double u1 = 1.0 - unit_double(a);  // (0, 1]
  const double u2 = unit_double(b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace sgda
