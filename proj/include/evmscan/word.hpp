// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evmscan {

/// 256-bit unsigned machine word with EVM (mod 2^256) semantics.
///
/// Limbs are little-endian: limbs_[0] holds the least significant 64 bits.
class Word {
public:
    static constexpr std::size_t kLimbs = 4;

    constexpr Word() = default;
    constexpr Word(std::uint64_t v) : limbs_{v, 0, 0, 0} {}  // NOLINT(google-explicit-constructor)
    constexpr Word(std::uint64_t l0, std::uint64_t l1, std::uint64_t l2, std::uint64_t l3)
        : limbs_{l0, l1, l2, l3} {}

    static constexpr Word max() { return {~0ULL, ~0ULL, ~0ULL, ~0ULL}; }

    /// Big-endian bytes; shorter inputs are treated as left-padded with zeros.
    static Word from_be_bytes(std::span<const std::uint8_t> bytes) {
        if (bytes.size() > 32) throw std::invalid_argument("word: more than 32 bytes");
        Word w;
        for (std::uint8_t b : bytes) w = (w << 8) | Word(b);
        return w;
    }

    /// Accepts an optional 0x prefix. At most 64 hex digits.
    static Word from_hex(std::string_view hex) {
        if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
        if (hex.empty() || hex.size() > 64) throw std::invalid_argument("word: bad hex length");
        Word w;
        for (char c : hex) {
            int d = hex_digit(c);
            if (d < 0) throw std::invalid_argument("word: bad hex digit");
            w = (w << 4) | Word(static_cast<std::uint64_t>(d));
        }
        return w;
    }

    std::array<std::uint8_t, 32> to_be_bytes() const {
        std::array<std::uint8_t, 32> out{};
        for (std::size_t i = 0; i < 32; ++i) {
            const std::size_t bit = (31 - i) * 8;
            out[i] = static_cast<std::uint8_t>(limbs_[bit / 64] >> (bit % 64));
        }
        return out;
    }

    /// Minimal lowercase hex with 0x prefix ("0x0" for zero).
    std::string to_hex() const {
        static constexpr char kDigits[] = "0123456789abcdef";
        std::string s;
        bool leading = true;
        for (int nib = 63; nib >= 0; --nib) {
            const unsigned d = static_cast<unsigned>(limbs_[nib / 16] >> ((nib % 16) * 4)) & 0xF;
            if (leading && d == 0 && nib != 0) continue;
            leading = false;
            s.push_back(kDigits[d]);
        }
        return "0x" + s;
    }

    constexpr std::uint64_t limb(std::size_t i) const { return limbs_[i]; }
    constexpr bool is_zero() const { return (limbs_[0] | limbs_[1] | limbs_[2] | limbs_[3]) == 0; }
    constexpr bool fits_u64() const { return (limbs_[1] | limbs_[2] | limbs_[3]) == 0; }
    constexpr std::uint64_t low_u64() const { return limbs_[0]; }
    constexpr bool sign_bit() const { return (limbs_[3] >> 63) != 0; }

    /// Number of significant bits (0 for zero).
    constexpr unsigned bit_length() const {
        for (int i = 3; i >= 0; --i) {
            if (limbs_[i] != 0) return static_cast<unsigned>(i) * 64 + (64 - static_cast<unsigned>(__builtin_clzll(limbs_[i])));
        }
        return 0;
    }
    constexpr bool bit(unsigned i) const { return (limbs_[i / 64] >> (i % 64)) & 1; }

    friend constexpr bool operator==(const Word&, const Word&) = default;
    friend constexpr std::strong_ordering operator<=>(const Word& a, const Word& b) {
        for (int i = 3; i >= 0; --i) {
            if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] <=> b.limbs_[i];
        }
        return std::strong_ordering::equal;
    }

    friend constexpr Word operator+(const Word& a, const Word& b) {
        Word r;
        unsigned carry = 0;
        for (std::size_t i = 0; i < kLimbs; ++i) {
            const unsigned __int128 s = static_cast<unsigned __int128>(a.limbs_[i]) + b.limbs_[i] + carry;
            r.limbs_[i] = static_cast<std::uint64_t>(s);
            carry = static_cast<unsigned>(s >> 64);
        }
        return r;
    }
    friend constexpr Word operator-(const Word& a, const Word& b) {
        Word r;
        std::uint64_t borrow = 0;
        for (std::size_t i = 0; i < kLimbs; ++i) {
            const std::uint64_t d = a.limbs_[i] - b.limbs_[i];
            const std::uint64_t b1 = a.limbs_[i] < b.limbs_[i];
            r.limbs_[i] = d - borrow;
            borrow = b1 | (d < borrow);
        }
        return r;
    }
    friend constexpr Word operator*(const Word& a, const Word& b) {
        Word r;
        for (std::size_t i = 0; i < kLimbs; ++i) {
            std::uint64_t carry = 0;
            for (std::size_t j = 0; i + j < kLimbs; ++j) {
                const unsigned __int128 p = static_cast<unsigned __int128>(a.limbs_[i]) * b.limbs_[j] +
                                            r.limbs_[i + j] + carry;
                r.limbs_[i + j] = static_cast<std::uint64_t>(p);
                carry = static_cast<std::uint64_t>(p >> 64);
            }
        }
        return r;
    }
    friend constexpr Word operator&(const Word& a, const Word& b) {
        return {a.limbs_[0] & b.limbs_[0], a.limbs_[1] & b.limbs_[1], a.limbs_[2] & b.limbs_[2], a.limbs_[3] & b.limbs_[3]};
    }
    friend constexpr Word operator|(const Word& a, const Word& b) {
        return {a.limbs_[0] | b.limbs_[0], a.limbs_[1] | b.limbs_[1], a.limbs_[2] | b.limbs_[2], a.limbs_[3] | b.limbs_[3]};
    }
    friend constexpr Word operator^(const Word& a, const Word& b) {
        return {a.limbs_[0] ^ b.limbs_[0], a.limbs_[1] ^ b.limbs_[1], a.limbs_[2] ^ b.limbs_[2], a.limbs_[3] ^ b.limbs_[3]};
    }
    friend constexpr Word operator~(const Word& a) { return {~a.limbs_[0], ~a.limbs_[1], ~a.limbs_[2], ~a.limbs_[3]}; }

    friend constexpr Word operator<<(const Word& a, unsigned shift) {
        if (shift >= 256) return {};
        Word r;
        const unsigned limb_shift = shift / 64, bit_shift = shift % 64;
        for (int i = 3; i >= static_cast<int>(limb_shift); --i) {
            std::uint64_t v = a.limbs_[i - limb_shift] << bit_shift;
            if (bit_shift != 0 && i - static_cast<int>(limb_shift) - 1 >= 0)
                v |= a.limbs_[i - limb_shift - 1] >> (64 - bit_shift);
            r.limbs_[i] = v;
        }
        return r;
    }
    friend constexpr Word operator>>(const Word& a, unsigned shift) {
        if (shift >= 256) return {};
        Word r;
        const unsigned limb_shift = shift / 64, bit_shift = shift % 64;
        for (unsigned i = 0; i + limb_shift < kLimbs; ++i) {
            std::uint64_t v = a.limbs_[i + limb_shift] >> bit_shift;
            if (bit_shift != 0 && i + limb_shift + 1 < kLimbs) v |= a.limbs_[i + limb_shift + 1] << (64 - bit_shift);
            r.limbs_[i] = v;
        }
        return r;
    }

private:
    static constexpr int hex_digit(char c) {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    }

    std::array<std::uint64_t, kLimbs> limbs_{};
};

namespace detail {

// Shift-subtract long division of a (hi:lo) 512-bit dividend by a nonzero divisor.
// Returns {quotient low 256 bits, remainder}.
inline std::pair<Word, Word> long_divide(const Word& hi, const Word& lo, const Word& divisor) {
    Word q, r;
    const unsigned top = hi.is_zero() ? lo.bit_length() : 256 + hi.bit_length();
    for (int i = static_cast<int>(top) - 1; i >= 0; --i) {
        const bool carry = r.sign_bit();
        const bool next = i >= 256 ? hi.bit(static_cast<unsigned>(i - 256)) : lo.bit(static_cast<unsigned>(i));
        r = (r << 1) | Word(next ? 1 : 0);
        if (carry || r >= divisor) {
            r = r - divisor;
            if (i < 256) q = q | (Word(1) << static_cast<unsigned>(i));
        }
    }
    return {q, r};
}

inline std::pair<Word, Word> mul_full(const Word& a, const Word& b) {
    std::array<std::uint64_t, 8> p{};
    for (std::size_t i = 0; i < 4; ++i) {
        std::uint64_t carry = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            const unsigned __int128 t = static_cast<unsigned __int128>(a.limb(i)) * b.limb(j) + p[i + j] + carry;
            p[i + j] = static_cast<std::uint64_t>(t);
            carry = static_cast<std::uint64_t>(t >> 64);
        }
        p[i + 4] = carry;
    }
    return {Word(p[4], p[5], p[6], p[7]), Word(p[0], p[1], p[2], p[3])};
}

inline Word negate(const Word& a) { return Word(0) - a; }

}  // namespace detail

// EVM arithmetic. Division by zero yields zero.

inline Word udiv(const Word& a, const Word& b) {
    if (b.is_zero()) return {};
    if (a.fits_u64() && b.fits_u64()) return Word(a.low_u64() / b.low_u64());
    return detail::long_divide({}, a, b).first;
}

inline Word umod(const Word& a, const Word& b) {
    if (b.is_zero()) return {};
    if (a.fits_u64() && b.fits_u64()) return Word(a.low_u64() % b.low_u64());
    return detail::long_divide({}, a, b).second;
}

inline Word sdiv(const Word& a, const Word& b) {
    if (b.is_zero()) return {};
    const bool neg_a = a.sign_bit(), neg_b = b.sign_bit();
    const Word q = udiv(neg_a ? detail::negate(a) : a, neg_b ? detail::negate(b) : b);
    return neg_a != neg_b ? detail::negate(q) : q;
}

inline Word smod(const Word& a, const Word& b) {
    if (b.is_zero()) return {};
    const bool neg_a = a.sign_bit();
    const Word r = umod(neg_a ? detail::negate(a) : a, b.sign_bit() ? detail::negate(b) : b);
    return neg_a ? detail::negate(r) : r;
}

inline Word addmod(const Word& a, const Word& b, const Word& m) {
    if (m.is_zero()) return {};
    const Word sum = a + b;
    const Word hi = sum < a ? Word(1) : Word(0);
    return detail::long_divide(hi, sum, m).second;
}

inline Word mulmod(const Word& a, const Word& b, const Word& m) {
    if (m.is_zero()) return {};
    const auto [hi, lo] = detail::mul_full(a, b);
    return detail::long_divide(hi, lo, m).second;
}

inline Word exp(Word base, const Word& exponent) {
    Word result(1);
    const unsigned bits = exponent.bit_length();
    for (unsigned i = 0; i < bits; ++i) {
        if (exponent.bit(i)) result = result * base;
        base = base * base;
    }
    return result;
}

inline bool slt(const Word& a, const Word& b) {
    if (a.sign_bit() != b.sign_bit()) return a.sign_bit();
    return a < b;
}

inline Word shl(const Word& shift, const Word& value) {
    return shift.fits_u64() && shift.low_u64() < 256 ? value << static_cast<unsigned>(shift.low_u64()) : Word{};
}

inline Word shr(const Word& shift, const Word& value) {
    return shift.fits_u64() && shift.low_u64() < 256 ? value >> static_cast<unsigned>(shift.low_u64()) : Word{};
}

inline Word sar(const Word& shift, const Word& value) {
    const bool neg = value.sign_bit();
    if (!shift.fits_u64() || shift.low_u64() >= 256) return neg ? Word::max() : Word{};
    const auto s = static_cast<unsigned>(shift.low_u64());
    Word r = value >> s;
    if (neg && s > 0) r = r | ~(Word::max() >> s);
    return r;
}

/// BYTE i x: the i-th byte counting from the most significant end.
inline Word byte_at(const Word& index, const Word& value) {
    if (!index.fits_u64() || index.low_u64() >= 32) return {};
    return (value >> static_cast<unsigned>((31 - index.low_u64()) * 8)) & Word(0xFF);
}

/// SIGNEXTEND b x: extend the sign of the (b+1)-byte value x.
inline Word signextend(const Word& b, const Word& value) {
    if (!b.fits_u64() || b.low_u64() >= 31) return value;
    const auto sign_bit = static_cast<unsigned>(b.low_u64() * 8 + 7);
    const Word mask = (Word(1) << (sign_bit + 1)) - Word(1);
    return value.bit(sign_bit) ? (value | ~mask) : (value & mask);
}

}  // namespace evmscan
