#pragma once

#include <cstdint>
#include <random>

namespace qkdprobe {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: independent streams for task `index` under one
/// master seed, regardless of execution order.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t index) {
  return std::mt19937_64(derive_seed(master, index));
}

/// Uniform double in [lo, hi) from the top 53 bits; avoids the
/// implementation-defined algorithm of std::uniform_real_distribution so
/// seeded runs reproduce across standard libraries.
inline double uniform(std::mt19937_64& eng, double lo = 0.0, double hi = 1.0) {
  const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline bool bernoulli(std::mt19937_64& eng, double p) { return uniform(eng) < p; }

}  // namespace qkdprobe
