#pragma once

#include <cstdint>

namespace censtail::rng {

/// SplitMix64 finalizer. One full avalanche round; statistically solid on
/// sequential counters, which is all we feed it.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based word keyed by (seed, stream, index). No state is carried,
/// so draws are order-independent and streams never collide.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

/// Uniform deviate in the open interval (0,1).
constexpr double uniform01(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t index) {
  const std::uint64_t bits = derive(seed, stream, index) >> 11;
  return (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
}

} // namespace censtail::rng
