#pragma once

#include <cstdint>
#include <random>

namespace corrpool {

using Rng = std::mt19937_64;

// Module tags mixed into every derived stream so that, for a given
// replication, each consumer draws from its own independent sequence.
enum class StreamTag : std::uint64_t {
  kPopulation = 1,
  kNaiveAssignment = 2,
  kCorrelatedAssignment = 3,
  kNaiveProtocol = 4,
  kCorrelatedProtocol = 5,
  kCalibration = 6,
  kDeltaX = 7,
  kDeltaZ = 8,
  kBootstrap = 9,
  kGeneric = 10,
};

inline constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kSplitMixGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation: a pure function of its three inputs, so a
/// replication's stream never depends on scheduling or worker count.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index,
                          StreamTag tag) noexcept;

Rng make_stream(std::uint64_t master_seed, std::uint64_t index, StreamTag tag);

}  // namespace corrpool
