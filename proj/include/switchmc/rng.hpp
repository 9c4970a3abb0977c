#pragma once

#include <cstdint>

namespace switchmc {

// splitmix64: the usual 64-bit finalizer-style generator step.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based stream derivation: the (master, index) pair always yields
/// the same value, independent of evaluation order or thread placement.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    std::uint64_t mixed = splitmix64(state);
    return splitmix64(state) ^ mixed;
}

/// Uniform double in [0, 1) from 53 random bits; stable across platforms,
/// unlike std::uniform_real_distribution.
constexpr double canonical_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace switchmc
