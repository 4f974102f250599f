// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "evmscan/disassembler.hpp"
#include "evmscan/opcodes.hpp"
#include "evmscan/word.hpp"

namespace evmscan {

class AsmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Minimal text assembler. Whitespace-separated tokens; `;` starts a comment.
///
///   name:          marks the current offset
///   PUSH 0x2a      smallest PUSHn holding the value
///   PUSH4 7        explicit width
///   PUSH @name     two-byte label reference (PUSHn @name for other widths)
///   ADD, JUMPDEST  any mnemonic
///   .byte 0xfe     raw byte
inline Bytes assemble(std::string_view source) {
    struct Fixup {
        std::size_t pos;
        unsigned width;
        std::string label;
    };
    Bytes out;
    std::map<std::string, std::size_t, std::less<>> labels;
    std::vector<Fixup> fixups;

    std::vector<std::string_view> tokens;
    for (std::size_t i = 0; i < source.size();) {
        const char c = source[i];
        if (c == ';') {
            while (i < source.size() && source[i] != '\n') ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else {
            std::size_t j = i;
            while (j < source.size() && !std::isspace(static_cast<unsigned char>(source[j])) && source[j] != ';') ++j;
            tokens.push_back(source.substr(i, j - i));
            i = j;
        }
    }

    auto parse_value = [](std::string_view t) {
        if (t.starts_with("0x") || t.starts_with("0X")) return Word::from_hex(t);
        Word w{0};
        if (t.empty()) throw AsmError("empty literal");
        for (char c : t) {
            if (c < '0' || c > '9') throw AsmError("bad literal: " + std::string(t));
            w = w * Word(10) + Word(static_cast<std::uint64_t>(c - '0'));
        }
        return w;
    };

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string_view t = tokens[i];
        if (t.ends_with(':')) {
            auto [it, inserted] = labels.emplace(std::string(t.substr(0, t.size() - 1)), out.size());
            if (!inserted) throw AsmError("duplicate label: " + it->first);
            continue;
        }
        if (t == ".byte") {
            if (++i >= tokens.size()) throw AsmError(".byte needs an operand");
            out.push_back(static_cast<std::uint8_t>(parse_value(tokens[i]).low_u64()));
            continue;
        }
        if (t.starts_with("PUSH")) {
            unsigned width = 0;
            if (t.size() > 4) {
                const auto code = opcode_from_mnemonic(t);
                if (!code) throw AsmError("unknown mnemonic: " + std::string(t));
                width = op::push_size(*code);
            }
            if (++i >= tokens.size()) throw AsmError(std::string(t) + " needs an operand");
            std::string_view arg = tokens[i];
            if (arg.starts_with('@')) {
                if (width == 0) width = 2;
                out.push_back(static_cast<std::uint8_t>(op::PUSH1 + width - 1));
                fixups.push_back({out.size(), width, std::string(arg.substr(1))});
                out.resize(out.size() + width, 0);
                continue;
            }
            const Word v = parse_value(arg);
            if (width == 0) width = v.is_zero() ? 1 : (v.bit_length() + 7) / 8;
            if (v.bit_length() > width * 8) throw AsmError("value does not fit: " + std::string(arg));
            out.push_back(static_cast<std::uint8_t>(op::PUSH1 + width - 1));
            const auto be = v.to_be_bytes();
            out.insert(out.end(), be.end() - width, be.end());
            continue;
        }
        const auto code = opcode_from_mnemonic(t);
        if (!code) throw AsmError("unknown mnemonic: " + std::string(t));
        out.push_back(*code);
    }

    for (const auto& f : fixups) {
        auto it = labels.find(f.label);
        if (it == labels.end()) throw AsmError("undefined label: " + f.label);
        std::size_t v = it->second;
        for (unsigned k = 0; k < f.width; ++k) {
            out[f.pos + f.width - 1 - k] = static_cast<std::uint8_t>(v & 0xFF);
            v >>= 8;
        }
        if (v != 0) throw AsmError("label out of range: " + f.label);
    }
    return out;
}

}  // namespace evmscan
