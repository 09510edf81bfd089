#pragma once

#include <cstdint>
#include <random>

namespace debtrank {

/// SplitMix64 step; the standard finalizer-style mixer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for ensemble substream `index` derived from the run seed. Part of the
/// reproducibility contract: identical (seed, index) pairs give identical
/// streams on every platform.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 1));
}

inline std::mt19937_64 make_substream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(substream_seed(seed, index));
}

/// Uniform double in [0, 1) built from the top 53 bits of the generator
/// output. std::uniform_real_distribution is not pinned down by the standard,
/// so it would break cross-platform reproducibility.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace debtrank
