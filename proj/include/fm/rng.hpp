#pragma once

// Seeding scheme: all randomness derives from one root seed.  Child seeds are
// produced as derive(root, subsystem, counter) where subsystem is a fixed tag
// (see Subsystem below) and counter enumerates draws within the subsystem
// (replication index, permutation index, ...).  Two child streams never
// collide unless (subsystem, counter) collide.

#include <cstdint>
#include <cstring>
#include <random>
#include <string_view>

namespace fm::rng {

enum Subsystem : std::uint64_t {
  kSimLoadings = 1,
  kSimFactors = 2,
  kSimNoise = 3,
  kPermutations = 4,
  kMonteCarlo = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t root, std::uint64_t subsystem,
                            std::uint64_t counter) {
  return splitmix64(splitmix64(root ^ (subsystem << 56)) + counter);
}

inline std::mt19937_64 engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

// FNV-1a over a byte view, mixed with a seed.  Used for content-keyed
// permutations: the key of a series depends only on its values, never on its
// position in the panel.
inline std::uint64_t content_key(std::uint64_t seed, const double* data,
                                 std::size_t count) {
  std::uint64_t h = 1469598103934665603ULL ^ splitmix64(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &data[i], sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffULL;
      h *= 1099511628211ULL;
    }
  }
  return splitmix64(h);
}

}  // namespace fm::rng
