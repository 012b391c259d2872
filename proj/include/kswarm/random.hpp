#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace kswarm {

/// Counter-based generator. With G = 0x9E3779B97F4A7C15 and mix the
/// SplitMix64 finalizer, draw n = 1, 2, ... of (seed, stream) is
/// mix(key + n * G) where key = mix(seed ^ mix(stream + G)). Only integer
/// arithmetic decides the bits, so a seed gives the same sequence on every
/// platform.
/// Normal variates use Box-Muller on two consecutive uniforms (the cosine
/// branch only).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(stream + kGolden))) {}

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

    /// Uniform on (0, 1].
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace kswarm
