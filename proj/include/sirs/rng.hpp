#pragma once

#include <cstdint>
#include <random>

namespace sirs {

/// splitmix64 mixing step. Used both as a seed scrambler and as the
/// substream derivation function.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives the seed of substream `index` from a master seed.
///
/// Substreams are indexed by a plain counter: stream j of master m has seed
/// splitmix64(m + j). Batch code assigns stream 2j to the noise of path j
/// and stream 2j+1 to anything else path j needs (e.g. attack generation),
/// so any path is reproducible in isolation from (master, j) alone.
inline std::uint64_t substream(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master + index);
}

/// Engine for one substream.
inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t index) {
    return std::mt19937_64(substream(master, index));
}

}  // namespace sirs
