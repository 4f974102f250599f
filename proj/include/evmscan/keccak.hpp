// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace evmscan {

/// Keccak-256 with the original (pre-FIPS) 0x01 padding, as used by Ethereum.
inline std::array<std::uint8_t, 32> keccak256(std::span<const std::uint8_t> data) {
    static constexpr std::uint64_t kRoundConstants[24] = {
        0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
        0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
        0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
        0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
        0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
        0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};
    static constexpr unsigned kRotations[25] = {0,  1,  62, 28, 27, 36, 44, 6,  55, 20, 3,  10, 43,
                                                25, 39, 41, 45, 15, 21, 8,  18, 2,  61, 56, 14};
    constexpr std::size_t kRate = 136;

    std::uint64_t st[25] = {};
    auto rotl = [](std::uint64_t x, unsigned n) { return n == 0 ? x : (x << n) | (x >> (64 - n)); };
    auto permute = [&] {
        for (std::uint64_t rc : kRoundConstants) {
            std::uint64_t c[5], b[25];
            for (int x = 0; x < 5; ++x) c[x] = st[x] ^ st[x + 5] ^ st[x + 10] ^ st[x + 15] ^ st[x + 20];
            for (int x = 0; x < 5; ++x) {
                const std::uint64_t d = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
                for (int y = 0; y < 25; y += 5) st[y + x] ^= d;
            }
            for (int x = 0; x < 5; ++x) {
                for (int y = 0; y < 5; ++y) b[y + 5 * ((2 * x + 3 * y) % 5)] = rotl(st[x + 5 * y], kRotations[x + 5 * y]);
            }
            for (int y = 0; y < 25; y += 5) {
                for (int x = 0; x < 5; ++x) st[y + x] = b[y + x] ^ (~b[y + (x + 1) % 5] & b[y + (x + 2) % 5]);
            }
            st[0] ^= rc;
        }
    };
    auto absorb = [&](const std::uint8_t* block) {
        for (std::size_t i = 0; i < kRate / 8; ++i) {
            std::uint64_t lane = 0;
            for (int k = 7; k >= 0; --k) lane = (lane << 8) | block[i * 8 + k];
            st[i] ^= lane;
        }
        permute();
    };

    std::size_t off = 0;
    for (; off + kRate <= data.size(); off += kRate) absorb(data.data() + off);
    std::uint8_t last[kRate] = {};
    if (data.size() > off) std::memcpy(last, data.data() + off, data.size() - off);
    last[data.size() - off] ^= 0x01;
    last[kRate - 1] ^= 0x80;
    absorb(last);

    std::array<std::uint8_t, 32> out{};
    for (std::size_t i = 0; i < 32; ++i) out[i] = static_cast<std::uint8_t>(st[i / 8] >> (8 * (i % 8)));
    return out;
}

inline std::array<std::uint8_t, 32> keccak256(std::string_view text) {
    return keccak256(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// First four bytes of keccak256(signature), big-endian.
inline std::uint32_t function_selector(std::string_view signature) {
    const auto h = keccak256(signature);
    return static_cast<std::uint32_t>(h[0]) << 24 | static_cast<std::uint32_t>(h[1]) << 16 |
           static_cast<std::uint32_t>(h[2]) << 8 | h[3];
}

}  // namespace evmscan
