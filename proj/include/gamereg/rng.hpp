#pragma once

// Seeded randomness with platform-stable sampling (std distributions are
// implementation-defined, the mt19937_64 sequence is not).

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace gamereg {

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t pick_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[pick_index(rng, i)]);
  }
}

}  // namespace gamereg
