#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace curate {

// mt19937_64 output is fixed by the standard; the std:: distributions are not, so
// sampling goes through these helpers to keep seeded runs identical across toolchains.
using Rng = std::mt19937_64;

// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n), n > 0, by rejection.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

inline bool bernoulli(Rng& rng, double p) {
  return uniform01(rng) < p;
}

// Standard normal via Box-Muller.
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace curate
