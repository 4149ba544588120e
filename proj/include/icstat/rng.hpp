#pragma once

#include <cstdint>
#include <random>

namespace icstat {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent engine for replicate `index` of stream `seed`. Replicates keyed
// this way are reproducible no matter how work is scheduled.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64{splitmix64(splitmix64(seed) + index)};
}

}  // namespace icstat
