#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mdr {

/// Deterministic random stream used by all sampling operations.
using RandomStream = std::mt19937_64;

// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a base seed and a tuple of indices.
/// Schedule-independent: the result depends only on the arguments, so
/// parallel sweeps reproduce the sequential ones bit for bit.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t p : parts) {
    h = splitmix64(h ^ splitmix64(p + 0x9e3779b97f4a7c15ULL));
  }
  return h;
}

inline RandomStream make_stream(std::uint64_t seed) { return RandomStream{seed}; }

}  // namespace mdr
