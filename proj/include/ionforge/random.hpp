#pragma once

// Seeded generators. All draws go through mt19937_64 and explicit bit-to-double
// conversions so results do not depend on the standard library's distributions.

#include <cstdint>
#include <random>

namespace ionforge {

/// SplitMix64 finalizer; used to derive independent stream seeds.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) + index);
}

using Engine = std::mt19937_64;

/// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(Engine& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

inline double uniform(Engine& g, double lo, double hi) { return lo + (hi - lo) * uniform01(g); }

/// Stream tags for derive_seed.
namespace streams {
inline constexpr std::uint64_t dataset = 1;
inline constexpr std::uint64_t init = 2;
inline constexpr std::uint64_t shuffle = 3;
inline constexpr std::uint64_t dropout = 4;
}  // namespace streams

}  // namespace ionforge
