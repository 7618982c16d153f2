#pragma once

#include <cstdint>
#include <random>

namespace rdpg {

/// 64-bit Mersenne twister; every stream in the library is one of these.
using Rng = std::mt19937_64;

/// Builds a generator for (seed, stream). Distinct pairs give unrelated
/// streams, so callers can split one seed into independent substreams.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Seed of replicate `index` under `base_seed`; injective in `index`.
inline std::uint64_t replicate_seed(std::uint64_t base_seed,
                                    std::uint64_t index) {
  return base_seed + index;
}

/// A fresh 64-bit seed for one purpose (clustering, retry k, ...) of `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose) {
  return make_rng(seed, purpose)();
}

/// Uniform double in [0, 1) with 53 random bits. Bit-identical across
/// standard libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace rdpg
