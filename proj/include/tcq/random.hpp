#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tcq {

// Scalar transforms over raw mt19937_64 draws. The standard <random>
// distribution adapters are implementation-defined, so a seed would not
// reproduce the same stream across toolchains; these fix the mapping.

// Uniform on [0, 1), 53 random mantissa bits.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1), safe as a log or inverse-CDF argument.
inline double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

// Standard normal via Box-Muller (one draw pair per variate).
inline double gaussian(std::mt19937_64& rng) {
  const double u1 = uniform_open(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Zero-mean Laplacian with the given scale, by inverse CDF.
inline double laplacian(std::mt19937_64& rng, double scale) {
  const double u = uniform_open(rng) - 0.5;
  const double mag = -std::log(1.0 - 2.0 * std::abs(u));
  return u < 0.0 ? -scale * mag : scale * mag;
}

// Stream splitter: a distinct, well-mixed seed per (seed, index) pair.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

}  // namespace tcq
