#pragma once

#include <cstdint>
#include <random>

namespace altimine {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent stream for one frame; stable across runs and job counts.
inline Rng frame_rng(std::uint64_t seed, std::uint64_t frame_id) {
    return Rng(splitmix64(seed ^ splitmix64(frame_id)));
}

}  // namespace altimine
