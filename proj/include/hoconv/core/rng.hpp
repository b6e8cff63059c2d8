#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace hoconv {

/// xoshiro256** (Blackman & Vigna) seeded through splitmix64.
///
/// Stream definition, so other implementations can reproduce it bit-exactly:
///   - the four state words are the first four outputs of splitmix64 started
///     at `seed`;
///   - next_u64() is the reference xoshiro256** step;
///   - uniform() = (next_u64() >> 11) * 2^-53, in [0, 1);
///   - normal() is the Box-Muller cosine branch on two uniforms, with the
///     first uniform replaced by 1 - u so the logarithm argument is in (0, 1].
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    double normal(double mu = 0.0, double sigma = 1.0) noexcept;
    /// Throws ParameterError when p is outside [0, 1].
    bool bernoulli(double p);
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> s_{};
};

Rng seeded_rng(std::uint64_t seed);

/// One splitmix64 finalisation step.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent substream seed from a base seed and a key path,
/// e.g. derive_seed(base, {split, class, index}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) noexcept;

}  // namespace hoconv
