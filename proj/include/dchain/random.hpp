#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace dchain {

/// Seedable, splittable random stream behind every stochastic choice.
///
/// The engine is xoshiro256** (Blackman & Vigna) with its state expanded
/// from the 64-bit seed by SplitMix64. Stream `s` of a seed is the base
/// sequence advanced by `s` calls of the 2^128-step jump polynomial, so
/// streams drawn from one seed never overlap for fewer than 2^128 draws.
///
/// All derived draws (bounded integers, uniforms, geometric waits) are
/// computed here rather than through <random> distributions, whose output
/// is implementation-defined; a seed therefore reproduces the same chain
/// on every standard library.
class RandomSource {
public:
    using result_type = std::uint64_t;

    static constexpr std::string_view kGeneratorName =
        "xoshiro256** (SplitMix64 seed expansion, 2^128 jump per stream)";

    explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return next(); }
    std::uint64_t next();

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 bits of resolution.
    double uniform01();

    bool bernoulli(double p);

    /// Number of independent trials up to and including the first success,
    /// each succeeding with probability `success`; support {1, 2, ...}.
    std::uint64_t geometric(double success);

    /// A stream independent of this one, derived from its current state.
    RandomSource split();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void jump();

    std::array<std::uint64_t, 4> state_{};
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace dchain
