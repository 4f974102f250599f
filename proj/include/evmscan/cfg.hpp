// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evmscan/disassembler.hpp"

namespace evmscan {

enum class ExitType : std::uint8_t { unconditional, conditional, terminal, fall };

inline std::string_view to_string(ExitType t) {
    switch (t) {
        case ExitType::unconditional: return "unconditional";
        case ExitType::conditional: return "conditional";
        case ExitType::terminal: return "terminal";
        case ExitType::fall: return "fall";
    }
    return "?";
}

using BlockId = std::uint32_t;

struct BasicBlock {
    BlockId id = 0;
    std::uint32_t start_offset = 0;
    std::uint32_t end_offset = 0;  // offset of the last instruction
    std::uint32_t first = 0;       // index of the first instruction in the decoded sequence
    std::uint32_t count = 0;
    ExitType exit_type = ExitType::fall;

    std::span<const Instruction> instructions(std::span<const Instruction> all) const {
        return all.subspan(first, count);
    }
    friend bool operator==(const BasicBlock&, const BasicBlock&) = default;
};

inline ExitType exit_type_of(const Instruction& last) {
    const auto& spec = last.spec();
    if (spec.jump == JumpKind::unconditional) return ExitType::unconditional;
    if (spec.jump == JumpKind::conditional) return ExitType::conditional;
    if (spec.is_terminal) return ExitType::terminal;
    return ExitType::fall;
}

/// Splits at offset 0, at every JUMPDEST, and after every jump or halting instruction.
inline std::vector<BasicBlock> build_blocks(std::span<const Instruction> instrs) {
    std::vector<BasicBlock> blocks;
    std::size_t i = 0;
    while (i < instrs.size()) {
        BasicBlock b;
        b.id = static_cast<BlockId>(blocks.size());
        b.first = static_cast<std::uint32_t>(i);
        b.start_offset = instrs[i].offset;
        std::size_t j = i;
        for (;;) {
            const auto& spec = instrs[j].spec();
            const bool ends = spec.is_terminal || spec.jump != JumpKind::none;
            const bool next_starts = j + 1 >= instrs.size() || instrs[j + 1].opcode == op::JUMPDEST;
            if (ends || next_starts) break;
            ++j;
        }
        b.count = static_cast<std::uint32_t>(j - i + 1);
        b.end_offset = instrs[j].offset;
        b.exit_type = exit_type_of(instrs[j]);
        blocks.push_back(b);
        i = j + 1;
    }
    return blocks;
}

enum class EdgeKind : std::uint8_t { conditional_jump, fall, unconditional_jump };

inline std::string_view to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::conditional_jump: return "conditional_jump";
        case EdgeKind::fall: return "fall";
        case EdgeKind::unconditional_jump: return "unconditional_jump";
    }
    return "?";
}

struct Edge {
    BlockId from = 0;
    BlockId to = 0;
    EdgeKind kind = EdgeKind::fall;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Control-flow graph recovered by symbolic execution. `blocks` lists every
/// block of the code; `nodes` the ones reached from the entry.
struct Cfg {
    std::vector<BasicBlock> blocks;
    std::vector<BlockId> nodes;  // sorted
    std::vector<Edge> edges;     // sorted, unique
    BlockId entry = 0;

    bool empty() const { return nodes.empty(); }
    bool reachable(BlockId b) const { return std::binary_search(nodes.begin(), nodes.end(), b); }

    std::vector<BlockId> successors(BlockId b) const {
        std::vector<BlockId> out;
        for (const auto& e : edges) {
            if (e.from == b && std::find(out.begin(), out.end(), e.to) == out.end()) out.push_back(e.to);
        }
        return out;
    }

    std::vector<Edge> out_edges(BlockId b) const {
        std::vector<Edge> out;
        for (const auto& e : edges) {
            if (e.from == b) out.push_back(e);
        }
        return out;
    }

    /// Block containing the instruction at `offset`, if any.
    const BasicBlock* block_at(std::uint32_t offset) const {
        auto it = std::upper_bound(blocks.begin(), blocks.end(), offset,
                                   [](std::uint32_t off, const BasicBlock& b) { return off < b.start_offset; });
        if (it == blocks.begin()) return nullptr;
        --it;
        return offset <= it->end_offset ? &*it : nullptr;
    }

    /// Block starting exactly at `offset`.
    const BasicBlock* block_starting_at(std::uint32_t offset) const {
        const BasicBlock* b = block_at(offset);
        return b && b->start_offset == offset ? b : nullptr;
    }
};

/// E - N + 2 over the reachable graph; 1 for an empty graph.
inline long cyclomatic_complexity(const Cfg& cfg) {
    if (cfg.empty()) return 1;
    return static_cast<long>(cfg.edges.size()) - static_cast<long>(cfg.nodes.size()) + 2;
}

inline std::string to_dot(const Cfg& cfg) {
    std::ostringstream out;
    out << "digraph cfg {\n  node [shape=box, fontname=monospace];\n";
    for (BlockId id : cfg.nodes) {
        const auto& b = cfg.blocks[id];
        out << "  b" << id << " [label=\"B" << id << " [" << b.start_offset << "-" << b.end_offset << "] "
            << to_string(b.exit_type) << "\"];\n";
    }
    for (const auto& e : cfg.edges) {
        out << "  b" << e.from << " -> b" << e.to << " [label=\"" << to_string(e.kind) << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

inline nlohmann::json to_json(const Cfg& cfg) {
    nlohmann::json blocks = nlohmann::json::array();
    for (BlockId id : cfg.nodes) {
        const auto& b = cfg.blocks[id];
        blocks.push_back({{"id", id},
                          {"start", b.start_offset},
                          {"end", b.end_offset},
                          {"exit", std::string(to_string(b.exit_type))}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : cfg.edges) {
        edges.push_back({{"from", e.from}, {"to", e.to}, {"kind", std::string(to_string(e.kind))}});
    }
    return {{"entry", cfg.entry}, {"blocks", std::move(blocks)}, {"edges", std::move(edges)}};
}

}  // namespace evmscan
