#pragma once

// Seed splitting and platform-stable sampling helpers.
//
// Every random stream in the library is derived from one 64-bit user seed:
//   round stream  = derive_seed(seed, kRoundStream, round)
//   ring stream   = derive_seed(round stream, center, color, band)
//   trial stream  = derive_seed(seed, kTrialStream, trial)
// std::mt19937_64 is fully specified by the standard; the distributions below
// are implemented here because the std:: ones are not.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace oclust {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kRoundStream = 0x726f756e64ULL;     // "round"
inline constexpr std::uint64_t kTrialStream = 0x747269616cULL;     // "trial"
inline constexpr std::uint64_t kGeneratorStream = 0x67656eULL;     // "gen"
inline constexpr std::uint64_t kRestartStream = 0x72657374ULL;     // "rest"

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

/// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller.
inline double standard_normal(Rng& rng) {
  double u1 = uniform_unit(rng);
  while (u1 <= 0.0) u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace oclust
