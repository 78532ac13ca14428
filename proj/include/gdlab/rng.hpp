#pragma once

#include <cstdint>
#include <random>

namespace gdlab {

// Roles a derived stream can play inside one replicate.
enum class StreamPurpose : std::uint64_t {
    dataset = 1,
    replacement = 2,
    population = 3,
    init = 4,
    sgd_order = 5,
    probe = 6,
};

namespace detail {

// splitmix64 finalizer, used as the mixing step of the seed hash
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based seed derivation: every (replicate, index, purpose) triple maps
// to its own stream, so replicates can run in any order or in parallel and
// still draw identical samples.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate,
                                 std::uint64_t index, StreamPurpose purpose) {
    std::uint64_t h = detail::mix64(master);
    h = detail::mix64(h ^ replicate);
    h = detail::mix64(h ^ index);
    h = detail::mix64(h ^ static_cast<std::uint64_t>(purpose));
    return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t replicate,
                    std::uint64_t index, StreamPurpose purpose) {
    return Rng(derive_seed(master, replicate, index, purpose));
}

}  // namespace gdlab
