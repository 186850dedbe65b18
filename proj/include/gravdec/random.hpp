#pragma once

#include <cstdint>
#include <random>

namespace gravdec {

/// Independent, reproducible stream for sub-task `index` of a run seeded
/// with `seed` (a Monte Carlo block, a trajectory). Streams depend only on
/// (seed, index), never on scheduling order.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace gravdec
