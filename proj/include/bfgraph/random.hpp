#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace bfgraph {

/// Random engine used everywhere. One engine per replica; never shared.
using Engine = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent replica seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for replica `index` of a run started from `base`.
inline std::uint64_t replica_seed(std::uint64_t base, std::uint64_t index) {
  return mix_seed(mix_seed(base) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

inline Engine make_engine(std::uint64_t seed) { return Engine{mix_seed(seed)}; }

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound). bound must be > 0.
inline std::uint64_t uniform_below(Engine& rng, std::uint64_t bound) {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = rng();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = rng();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Exponential waiting time with the given rate (> 0).
inline double exponential(Engine& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

inline double standard_normal(Engine& rng) {
  return std::normal_distribution<double>{}(rng);
}

inline std::uint64_t poisson(Engine& rng, double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<std::uint64_t>{mean}(rng);
}

}  // namespace bfgraph
