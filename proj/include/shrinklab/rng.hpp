#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace shrinklab {

/// SplitMix64 finalizer; a bijective 64-bit mix with good avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Derives an independent substream seed from a master seed and a path of
/// integer tags (purpose, scenario, run, ...). The mapping depends only on
/// the arguments, so results are identical no matter how work is scheduled
/// across threads.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t part : path) {
        h = mix64(h ^ mix64(part));
    }
    return h;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// Stream purpose tags used when deriving per-task seeds.
namespace streams {
constexpr std::uint64_t kIntercept = 0x01;
constexpr std::uint64_t kDevPool = 0x02;
constexpr std::uint64_t kValidation = 0x03;
constexpr std::uint64_t kDraw = 0x04;
constexpr std::uint64_t kBootstrap = 0x05;
constexpr std::uint64_t kCvPlan = 0x06;
}  // namespace streams

}  // namespace shrinklab
