#pragma once

// Seeded RNG helpers. Distributions are spelled out here rather than taken
// from <random> so sampled values are reproducible across standard-library
// implementations (std::uniform_real_distribution is not pinned down).

#include <cstdint>
#include <random>

namespace visnav {

using Rng = std::mt19937_64;

inline double uniform_double(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
  return lo + (hi - lo) * u;
}

// Modulo bias is ~2^-64 at our ranges; determinism is what matters here.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return n == 0 ? 0 : static_cast<std::size_t>(rng() % n);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  return x;
}

}  // namespace visnav
