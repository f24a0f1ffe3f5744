#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace kdesplit {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) built from the top 53 bits of one draw, so the
// stream is identical across standard library implementations.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for one run, derived from the master seed and the run coordinates
// (e.g. n, seed index, bandwidth index).
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(master);
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p + 0x51ed2701ULL));
  return h;
}

}  // namespace kdesplit
