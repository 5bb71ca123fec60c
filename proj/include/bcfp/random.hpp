#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace bcfp {

/// PCG32 (XSH-RR 64/32) with an explicit stream selector.
///
/// Seeding follows the reference pcg32_srandom_r(initstate, initseq), so a
/// (seed, stream) pair reproduces the same sequence everywhere.
class Pcg32 {
public:
    using result_type = std::uint32_t;

    constexpr Pcg32(std::uint64_t seed, std::uint64_t stream = 0) noexcept {
        state_ = 0;
        inc_ = (stream << 1U) | 1U;
        (*this)();
        state_ += seed;
        (*this)();
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        const std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const auto xorshifted = static_cast<std::uint32_t>(((old >> 18U) ^ old) >> 27U);
        const auto rot = static_cast<std::uint32_t>(old >> 59U);
        return (xorshifted >> rot) | (xorshifted << ((-rot) & 31U));
    }

    /// Unbiased integer in [0, bound), bound > 0.
    constexpr std::uint32_t bounded(std::uint32_t bound) noexcept {
        const std::uint32_t threshold = (-bound) % bound;
        for (;;) {
            const std::uint32_t r = (*this)();
            if (r >= threshold) {
                return r % bound;
            }
        }
    }

private:
    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 0;
};

/// Fisher-Yates shuffle driven by Pcg32::bounded, identical on every
/// platform (std::shuffle's algorithm is unspecified).
template <typename T>
void shuffle(std::span<T> items, Pcg32& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = rng.bounded(static_cast<std::uint32_t>(i));
        std::swap(items[i - 1], items[j]);
    }
}

/// splitmix64 finalizer, used to derive child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

}  // namespace bcfp
