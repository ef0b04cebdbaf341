#pragma once

#include <cstdint>
#include <random>

namespace dampchan {

// Independent stream for (seed, stream, index): counter-based splitting so
// replicas and grid points never share random state.
inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace dampchan
