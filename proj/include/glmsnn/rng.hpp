#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace glmsnn {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent seeds from a base seed
/// and a list of stream indices (epoch, example, fold, ...).
constexpr std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> stream) {
  std::uint64_t s = mix_seed(base);
  for (std::uint64_t v : stream) s = mix_seed(s ^ mix_seed(v + 0x632be59bd9b4e019ULL));
  return s;
}

/// Uniform double in [0, 1) built from the top 53 bits, so draws are identical
/// across standard library implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace glmsnn
