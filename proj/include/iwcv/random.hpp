#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace iwcv {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (master seed, ids...).
/// Repeats never share a generator; each one derives its own from its index.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids) noexcept {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t id : ids) {
        h = splitmix64(h ^ splitmix64(id + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
    return Rng(derive_seed(master, ids));
}

}  // namespace iwcv
