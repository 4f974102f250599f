// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "evmscan/opcodes.hpp"
#include "evmscan/word.hpp"

namespace evmscan {

using Bytes = std::vector<std::uint8_t>;

class HexError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Instruction {
    std::uint32_t offset = 0;
    std::uint8_t opcode = op::STOP;
    std::optional<Word> immediate;  // PUSH1..PUSH32 only

    const OpcodeSpec& spec() const { return opcode_spec(opcode); }
    std::string_view mnemonic() const { return spec().mnemonic; }
    unsigned immediate_size() const { return op::push_size(opcode); }
    std::uint32_t next_offset() const { return offset + 1 + immediate_size(); }

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Linear sweep. Push data is skipped, never decoded as opcodes. A PUSH whose
/// immediate runs past the end of the code reads the missing bytes as zero.
inline std::vector<Instruction> decode(std::span<const std::uint8_t> code) {
    std::vector<Instruction> out;
    out.reserve(code.size());
    std::size_t pc = 0;
    while (pc < code.size()) {
        Instruction ins;
        ins.offset = static_cast<std::uint32_t>(pc);
        ins.opcode = code[pc];
        if (const unsigned n = op::push_size(ins.opcode); n > 0) {
            std::uint8_t buf[32] = {};
            for (unsigned i = 0; i < n; ++i) {
                if (pc + 1 + i < code.size()) buf[i] = code[pc + 1 + i];
            }
            ins.immediate = Word::from_be_bytes(std::span<const std::uint8_t>(buf, n));
        }
        pc = ins.next_offset();
        out.push_back(ins);
    }
    return out;
}

/// Inverse of decode (a truncated trailing PUSH comes back zero-padded).
inline Bytes encode(std::span<const Instruction> instrs) {
    Bytes out;
    for (const auto& ins : instrs) {
        out.push_back(ins.opcode);
        if (const unsigned n = ins.immediate_size(); n > 0) {
            const auto be = ins.immediate.value_or(Word{}).to_be_bytes();
            out.insert(out.end(), be.end() - n, be.end());
        }
    }
    return out;
}

/// Hex text to bytes. Accepts an optional 0x prefix; ASCII whitespace anywhere is ignored.
inline Bytes parse_hex(std::string_view text) {
    std::string digits;
    digits.reserve(text.size());
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') continue;
        digits.push_back(c);
    }
    std::string_view d = digits;
    if (d.starts_with("0x") || d.starts_with("0X")) d.remove_prefix(2);
    if (d.size() % 2 != 0) throw HexError("hex input has odd number of digits");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    Bytes out(d.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = nibble(d[2 * i]), lo = nibble(d[2 * i + 1]);
        if (hi < 0 || lo < 0) throw HexError("invalid hex digit at position " + std::to_string(2 * i));
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return out;
}

inline std::string to_hex(std::span<const std::uint8_t> bytes, bool prefix = true) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s = prefix ? "0x" : "";
    s.reserve(s.size() + bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        s.push_back(kDigits[b >> 4]);
        s.push_back(kDigits[b & 0xF]);
    }
    return s;
}

/// "PUSH1 0x70" style listing line.
inline std::string format_instruction(const Instruction& ins) {
    std::string s = std::string(ins.mnemonic());
    if (ins.immediate) s += " " + ins.immediate->to_hex();
    return s;
}

}  // namespace evmscan
