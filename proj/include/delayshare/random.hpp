#pragma once

#include <cstdint>
#include <random>

namespace delayshare {

// Draws from the raw 64-bit stream so results do not depend on the standard
// library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

inline int uniform_index(std::mt19937_64& rng, int bound) {
  return int(rng() % std::uint64_t(bound));
}

}  // namespace delayshare
