// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace evmscan {

/// Opcode byte values for the Constantinople instruction set.
namespace op {
inline constexpr std::uint8_t STOP = 0x00, ADD = 0x01, MUL = 0x02, SUB = 0x03, DIV = 0x04, SDIV = 0x05,
                              MOD = 0x06, SMOD = 0x07, ADDMOD = 0x08, MULMOD = 0x09, EXP = 0x0a,
                              SIGNEXTEND = 0x0b;
inline constexpr std::uint8_t LT = 0x10, GT = 0x11, SLT = 0x12, SGT = 0x13, EQ = 0x14, ISZERO = 0x15,
                              AND = 0x16, OR = 0x17, XOR = 0x18, NOT = 0x19, BYTE = 0x1a, SHL = 0x1b,
                              SHR = 0x1c, SAR = 0x1d;
inline constexpr std::uint8_t SHA3 = 0x20;
inline constexpr std::uint8_t ADDRESS = 0x30, BALANCE = 0x31, ORIGIN = 0x32, CALLER = 0x33, CALLVALUE = 0x34,
                              CALLDATALOAD = 0x35, CALLDATASIZE = 0x36, CALLDATACOPY = 0x37, CODESIZE = 0x38,
                              CODECOPY = 0x39, GASPRICE = 0x3a, EXTCODESIZE = 0x3b, EXTCODECOPY = 0x3c,
                              RETURNDATASIZE = 0x3d, RETURNDATACOPY = 0x3e, EXTCODEHASH = 0x3f;
inline constexpr std::uint8_t BLOCKHASH = 0x40, COINBASE = 0x41, TIMESTAMP = 0x42, NUMBER = 0x43,
                              DIFFICULTY = 0x44, GASLIMIT = 0x45;
inline constexpr std::uint8_t POP = 0x50, MLOAD = 0x51, MSTORE = 0x52, MSTORE8 = 0x53, SLOAD = 0x54,
                              SSTORE = 0x55, JUMP = 0x56, JUMPI = 0x57, PC = 0x58, MSIZE = 0x59, GAS = 0x5a,
                              JUMPDEST = 0x5b;
inline constexpr std::uint8_t PUSH1 = 0x60, PUSH32 = 0x7f, DUP1 = 0x80, DUP16 = 0x8f, SWAP1 = 0x90,
                              SWAP16 = 0x9f, LOG0 = 0xa0, LOG4 = 0xa4;
inline constexpr std::uint8_t CREATE = 0xf0, CALL = 0xf1, CALLCODE = 0xf2, RETURN = 0xf3,
                              DELEGATECALL = 0xf4, CREATE2 = 0xf5, STATICCALL = 0xfa, REVERT = 0xfd,
                              INVALID = 0xfe, SELFDESTRUCT = 0xff;

constexpr bool is_push(std::uint8_t b) { return b >= PUSH1 && b <= PUSH32; }
constexpr unsigned push_size(std::uint8_t b) { return is_push(b) ? b - PUSH1 + 1u : 0u; }
constexpr bool is_dup(std::uint8_t b) { return b >= DUP1 && b <= DUP16; }
constexpr bool is_swap(std::uint8_t b) { return b >= SWAP1 && b <= SWAP16; }
constexpr bool is_log(std::uint8_t b) { return b >= LOG0 && b <= LOG4; }
constexpr bool is_call_family(std::uint8_t b) {
    return b == CALL || b == CALLCODE || b == DELEGATECALL || b == STATICCALL;
}
}  // namespace op

enum class JumpKind : std::uint8_t { none, unconditional, conditional };

struct OpcodeSpec {
    std::string_view mnemonic;
    std::uint8_t pops = 0;
    std::uint8_t pushes = 0;
    bool is_terminal = false;
    JumpKind jump = JumpKind::none;
    bool defined = false;

    friend constexpr bool operator==(const OpcodeSpec&, const OpcodeSpec&) = default;
};

namespace detail {

inline constexpr OpcodeSpec kInvalidSpec{"INVALID", 0, 0, true, JumpKind::none, false};

constexpr std::array<OpcodeSpec, 256> make_opcode_table() {
    std::array<OpcodeSpec, 256> t{};
    for (auto& s : t) s = kInvalidSpec;
    auto def = [&t](std::uint8_t code, std::string_view name, std::uint8_t pops, std::uint8_t pushes,
                    bool terminal = false, JumpKind jump = JumpKind::none) {
        t[code] = OpcodeSpec{name, pops, pushes, terminal, jump, true};
    };
    using namespace op;
    def(STOP, "STOP", 0, 0, true);
    def(ADD, "ADD", 2, 1);
    def(MUL, "MUL", 2, 1);
    def(SUB, "SUB", 2, 1);
    def(DIV, "DIV", 2, 1);
    def(SDIV, "SDIV", 2, 1);
    def(MOD, "MOD", 2, 1);
    def(SMOD, "SMOD", 2, 1);
    def(ADDMOD, "ADDMOD", 3, 1);
    def(MULMOD, "MULMOD", 3, 1);
    def(EXP, "EXP", 2, 1);
    def(SIGNEXTEND, "SIGNEXTEND", 2, 1);
    def(LT, "LT", 2, 1);
    def(GT, "GT", 2, 1);
    def(SLT, "SLT", 2, 1);
    def(SGT, "SGT", 2, 1);
    def(EQ, "EQ", 2, 1);
    def(ISZERO, "ISZERO", 1, 1);
    def(AND, "AND", 2, 1);
    def(OR, "OR", 2, 1);
    def(XOR, "XOR", 2, 1);
    def(NOT, "NOT", 1, 1);
    def(BYTE, "BYTE", 2, 1);
    def(SHL, "SHL", 2, 1);
    def(SHR, "SHR", 2, 1);
    def(SAR, "SAR", 2, 1);
    def(SHA3, "SHA3", 2, 1);
    def(ADDRESS, "ADDRESS", 0, 1);
    def(BALANCE, "BALANCE", 1, 1);
    def(ORIGIN, "ORIGIN", 0, 1);
    def(CALLER, "CALLER", 0, 1);
    def(CALLVALUE, "CALLVALUE", 0, 1);
    def(CALLDATALOAD, "CALLDATALOAD", 1, 1);
    def(CALLDATASIZE, "CALLDATASIZE", 0, 1);
    def(CALLDATACOPY, "CALLDATACOPY", 3, 0);
    def(CODESIZE, "CODESIZE", 0, 1);
    def(CODECOPY, "CODECOPY", 3, 0);
    def(GASPRICE, "GASPRICE", 0, 1);
    def(EXTCODESIZE, "EXTCODESIZE", 1, 1);
    def(EXTCODECOPY, "EXTCODECOPY", 4, 0);
    def(RETURNDATASIZE, "RETURNDATASIZE", 0, 1);
    def(RETURNDATACOPY, "RETURNDATACOPY", 3, 0);
    def(EXTCODEHASH, "EXTCODEHASH", 1, 1);
    def(BLOCKHASH, "BLOCKHASH", 1, 1);
    def(COINBASE, "COINBASE", 0, 1);
    def(TIMESTAMP, "TIMESTAMP", 0, 1);
    def(NUMBER, "NUMBER", 0, 1);
    def(DIFFICULTY, "DIFFICULTY", 0, 1);
    def(GASLIMIT, "GASLIMIT", 0, 1);
    def(POP, "POP", 1, 0);
    def(MLOAD, "MLOAD", 1, 1);
    def(MSTORE, "MSTORE", 2, 0);
    def(MSTORE8, "MSTORE8", 2, 0);
    def(SLOAD, "SLOAD", 1, 1);
    def(SSTORE, "SSTORE", 2, 0);
    def(JUMP, "JUMP", 1, 0, false, JumpKind::unconditional);
    def(JUMPI, "JUMPI", 2, 0, false, JumpKind::conditional);
    def(PC, "PC", 0, 1);
    def(MSIZE, "MSIZE", 0, 1);
    def(GAS, "GAS", 0, 1);
    def(JUMPDEST, "JUMPDEST", 0, 0);

    constexpr std::string_view kPush[] = {
        "PUSH1",  "PUSH2",  "PUSH3",  "PUSH4",  "PUSH5",  "PUSH6",  "PUSH7",  "PUSH8",
        "PUSH9",  "PUSH10", "PUSH11", "PUSH12", "PUSH13", "PUSH14", "PUSH15", "PUSH16",
        "PUSH17", "PUSH18", "PUSH19", "PUSH20", "PUSH21", "PUSH22", "PUSH23", "PUSH24",
        "PUSH25", "PUSH26", "PUSH27", "PUSH28", "PUSH29", "PUSH30", "PUSH31", "PUSH32"};
    constexpr std::string_view kDup[] = {"DUP1", "DUP2",  "DUP3",  "DUP4",  "DUP5",  "DUP6",  "DUP7",  "DUP8",
                                         "DUP9", "DUP10", "DUP11", "DUP12", "DUP13", "DUP14", "DUP15", "DUP16"};
    constexpr std::string_view kSwap[] = {"SWAP1",  "SWAP2",  "SWAP3",  "SWAP4",  "SWAP5",  "SWAP6",
                                          "SWAP7",  "SWAP8",  "SWAP9",  "SWAP10", "SWAP11", "SWAP12",
                                          "SWAP13", "SWAP14", "SWAP15", "SWAP16"};
    constexpr std::string_view kLog[] = {"LOG0", "LOG1", "LOG2", "LOG3", "LOG4"};
    for (unsigned i = 0; i < 32; ++i) def(static_cast<std::uint8_t>(PUSH1 + i), kPush[i], 0, 1);
    for (unsigned i = 0; i < 16; ++i) {
        def(static_cast<std::uint8_t>(DUP1 + i), kDup[i], static_cast<std::uint8_t>(i + 1),
            static_cast<std::uint8_t>(i + 2));
        def(static_cast<std::uint8_t>(SWAP1 + i), kSwap[i], static_cast<std::uint8_t>(i + 2),
            static_cast<std::uint8_t>(i + 2));
    }
    for (unsigned i = 0; i < 5; ++i) def(static_cast<std::uint8_t>(LOG0 + i), kLog[i], static_cast<std::uint8_t>(i + 2), 0);

    def(CREATE, "CREATE", 3, 1);
    def(CALL, "CALL", 7, 1);
    def(CALLCODE, "CALLCODE", 7, 1);
    def(RETURN, "RETURN", 2, 0, true);
    def(DELEGATECALL, "DELEGATECALL", 6, 1);
    def(CREATE2, "CREATE2", 4, 1);
    def(STATICCALL, "STATICCALL", 6, 1);
    def(REVERT, "REVERT", 2, 0, true);
    def(INVALID, "INVALID", 0, 0, true);
    def(SELFDESTRUCT, "SELFDESTRUCT", 1, 0, true);
    // 0xfe is the designated invalid instruction; it shares the undefined-byte spec.
    t[INVALID] = kInvalidSpec;
    return t;
}

inline constexpr std::array<OpcodeSpec, 256> kOpcodeTable = make_opcode_table();

}  // namespace detail

/// Total: undefined bytes map to the INVALID spec.
constexpr const OpcodeSpec& opcode_spec(std::uint8_t opcode) { return detail::kOpcodeTable[opcode]; }

/// Reverse lookup for assembler input; case-sensitive canonical names.
inline std::optional<std::uint8_t> opcode_from_mnemonic(std::string_view name) {
    if (name == "INVALID") return op::INVALID;
    for (unsigned i = 0; i < 256; ++i) {
        const auto& spec = detail::kOpcodeTable[i];
        if (spec.defined && spec.mnemonic == name) return static_cast<std::uint8_t>(i);
    }
    return std::nullopt;
}

}  // namespace evmscan
