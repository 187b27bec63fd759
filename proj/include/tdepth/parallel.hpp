#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace tdepth {

/// Selects the OpenMP kernel or the plain serial loop.
enum class Exec { serial, parallel };

/// Loops shorter than this stay serial even under Exec::parallel; thread start-up dominates.
inline constexpr std::size_t kParallelGrain = 256;

inline bool run_parallel(Exec exec, std::size_t work_items) {
    return exec == Exec::parallel && work_items >= kParallelGrain;
}

/// Counter-based seed fan-out (splitmix64 finaliser), so that every sub-component
/// of a run gets an independent, reproducible stream from one top-level seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

}  // namespace tdepth
