#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

// Seeded draws used anywhere reproducibility matters. std::shuffle and the
// std distributions are implementation-defined, these are not.

namespace honem::rng {

// Uniform in [0, n) by rejection. n must be positive.
inline std::uint64_t bounded(std::mt19937_64& g, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = g();
    if (r >= threshold) return r % n;
  }
}

// Fisher-Yates with explicit bounded draws.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[bounded(g, i)]);
}

// Uniform in [0, 1) with 53-bit resolution.
inline double uniform01(std::mt19937_64& g) { return (g() >> 11) * 0x1.0p-53; }

}  // namespace honem::rng
