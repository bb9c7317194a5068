#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace opbeam {

/// Engine used for every seeded stream in the library. mt19937_64 is fully
/// specified by the standard, so outputs are reproducible across platforms.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
/// std::uniform_real_distribution is implementation-defined, so we avoid it.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
    std::uint64_t draw = rng();
    while (draw >= limit) {
        draw = rng();
    }
    return static_cast<std::size_t>(draw % range);
}

/// Mixes a base seed with a stream id (splitmix64 finalizer) so that
/// independent sub-streams can be derived from one user seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace opbeam
