#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace bcfp {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

/// 64-bit FNV-1a over a byte sequence.
constexpr std::uint64_t hash64(std::span<const std::uint8_t> bytes) noexcept {
    std::uint64_t h = kFnvOffsetBasis;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t hash64(std::string_view text) noexcept {
    std::uint64_t h = kFnvOffsetBasis;
    for (char c : text) {
        h ^= static_cast<std::uint8_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

/// Incremental FNV-1a over a tuple of integer fields.
///
/// Each field is serialized as a one-byte tag followed by the value as a
/// fixed-width 64-bit little-endian integer, independent of host byte order.
class TupleHasher {
public:
    constexpr TupleHasher& field(std::uint8_t tag, std::uint64_t value) noexcept {
        fold(tag);
        for (int i = 0; i < 8; ++i) {
            fold(static_cast<std::uint8_t>(value >> (8 * i)));
        }
        return *this;
    }

    constexpr TupleHasher& field(std::uint8_t tag, std::int64_t value) noexcept {
        return field(tag, static_cast<std::uint64_t>(value));
    }

    constexpr TupleHasher& field(std::uint8_t tag, std::uint32_t value) noexcept {
        return field(tag, static_cast<std::uint64_t>(value));
    }

    constexpr TupleHasher& field(std::uint8_t tag, int value) noexcept {
        return field(tag, static_cast<std::uint64_t>(static_cast<std::int64_t>(value)));
    }

    constexpr TupleHasher& field(std::uint8_t tag, bool value) noexcept {
        return field(tag, static_cast<std::uint64_t>(value ? 1 : 0));
    }

    [[nodiscard]] constexpr std::uint64_t digest() const noexcept { return state_; }

private:
    constexpr void fold(std::uint8_t b) noexcept {
        state_ ^= b;
        state_ *= kFnvPrime;
    }

    std::uint64_t state_ = kFnvOffsetBasis;
};

}  // namespace bcfp
