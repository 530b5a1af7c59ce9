#pragma once

#include <array>
#include <cstdint>

namespace factorforge {

/// SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Per-stream seed for stream `index` of base seed `seed` (tree i of a forest, window i, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// xoshiro256** seeded through SplitMix64. Portable and bit-reproducible everywhere.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform integer in [0, bound), unbiased (rejection sampling). bound must be > 0.
  std::uint64_t bounded(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller (one value per call; the partner is discarded).
  double normal();

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace factorforge
