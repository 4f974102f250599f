// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evmscan/cfg.hpp"
#include "evmscan/executor.hpp"
#include "evmscan/expr.hpp"

namespace evmscan {

// ---------------------------------------------------------------------------
// Money calls

enum class CallKind : std::uint8_t { NoMoney, GasLimitedMoney, GasUnlimitedMoney };

inline std::string_view to_string(CallKind k) {
    switch (k) {
        case CallKind::NoMoney: return "NoMoney";
        case CallKind::GasLimitedMoney: return "GasLimitedMoney";
        case CallKind::GasUnlimitedMoney: return "GasUnlimitedMoney";
    }
    return "?";
}

/// Gas stipend that transfer() and send() push as the gas operand.
inline const Word kTransferStipend{2300};

/// A call moves Ether unless its value operand is absent or a constant zero;
/// symbolic values count as nonzero. Money calls whose gas operand involves
/// the 2300 stipend are gas-limited. Constants folded from expressions that
/// involved 2300 still count, which covers the ISZERO(value) * 2300 idiom.
inline CallKind classify_call(const CallSite& site) {
    if (!site.value_expr || site.value_expr->is_zero()) return CallKind::NoMoney;
    return mentions_literal(site.gas_expr, kTransferStipend) ? CallKind::GasLimitedMoney : CallKind::GasUnlimitedMoney;
}

inline bool is_money(CallKind k) { return k != CallKind::NoMoney; }

// ---------------------------------------------------------------------------
// Loops

struct LoopInfo {
    BlockId head = 0;
    std::vector<BlockId> body;  // sorted; contains head
    std::optional<Expr> bound_slot;
    bool size_limited = true;

    bool contains(BlockId b) const { return std::binary_search(body.begin(), body.end(), b); }
};

struct LoopSearch {
    std::vector<LoopInfo> loops;  // sorted by head
    bool truncated = false;
    std::uint64_t visits = 0;
};

/// Path-enumerating DFS from the entry. A successor already on the current
/// path is a loop head; the path segment from it is the loop body. Blocks
/// whose whole exploration met no revisit are cached as cycle-free and not
/// explored again. Shared subroutines therefore show up as loops.
inline LoopSearch find_loops(const Cfg& cfg, std::uint64_t visit_budget = 2'000'000) {
    LoopSearch out;
    if (cfg.empty()) return out;
    const std::size_t n = cfg.blocks.size();
    std::vector<std::vector<BlockId>> succ(n);
    for (const auto& e : cfg.edges) {
        if (std::find(succ[e.from].begin(), succ[e.from].end(), e.to) == succ[e.from].end()) succ[e.from].push_back(e.to);
    }
    for (auto& s : succ) std::sort(s.begin(), s.end());

    std::vector<char> on_path(n, 0), acyclic(n, 0);
    std::map<BlockId, std::set<BlockId>> bodies;
    struct Frame {
        BlockId node;
        std::size_t next = 0;
        bool found = false;
    };
    std::vector<Frame> stack;
    stack.push_back({cfg.entry});
    on_path[cfg.entry] = 1;
    out.visits = 1;
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < succ[f.node].size()) {
            const BlockId s = succ[f.node][f.next++];
            if (on_path[s]) {
                auto& body = bodies[s];
                auto it = std::find_if(stack.begin(), stack.end(), [s](const Frame& fr) { return fr.node == s; });
                for (; it != stack.end(); ++it) body.insert(it->node);
                f.found = true;
            } else if (!acyclic[s]) {
                if (++out.visits > visit_budget) {
                    out.truncated = true;
                    break;
                }
                on_path[s] = 1;
                stack.push_back({s});
            }
            continue;
        }
        const bool found = f.found;
        on_path[f.node] = 0;
        if (!found) acyclic[f.node] = 1;
        stack.pop_back();
        if (found && !stack.empty()) stack.back().found = true;
    }
    for (auto& [head, body] : bodies) {
        LoopInfo li;
        li.head = head;
        li.body.assign(body.begin(), body.end());
        out.loops.push_back(std::move(li));
    }
    return out;
}

namespace detail {

inline bool is_comparison(Tag t) {
    return t == Tag(op::LT) || t == Tag(op::GT) || t == Tag(op::SLT) || t == Tag(op::SGT) || t == Tag(op::EQ);
}

// Deepest SLOAD node in e (ties: smaller slot expression, then first in pre-order).
inline void innermost_sload(const Expr& e, unsigned depth, std::optional<Expr>& best, unsigned& best_depth) {
    if (e.is_symbol() && e.tag() == Tag(op::SLOAD) && !e.args().empty()) {
        const Expr& slot = e.args()[0];
        if (!best || depth > best_depth || (depth == best_depth && slot.size() < best->size())) {
            best = slot;
            best_depth = depth;
        }
    }
    for (const auto& a : e.args()) innermost_sload(a, depth + 1, best, best_depth);
}

inline bool reads_slot(const Expr& e, const Expr& slot) {
    const auto slots = slot_ids(e);
    return std::find(slots.begin(), slots.end(), slot) != slots.end();
}

// For every comparison in e with one side reading `slot`, the other side.
inline void compared_against(const Expr& e, const Expr& slot, std::vector<Expr>& out) {
    if (e.is_apply() && is_comparison(e.tag()) && e.args().size() == 2) {
        for (int side = 0; side < 2; ++side) {
            if (reads_slot(e.args()[side], slot)) out.push_back(e.args()[1 - side]);
        }
    }
    for (const auto& a : e.args()) compared_against(a, slot, out);
}

inline const std::vector<Expr>* block_conditions(const Execution& ex, const BasicBlock& b) {
    if (b.exit_type != ExitType::conditional) return nullptr;
    auto it = ex.conditions.find(b.end_offset);
    return it == ex.conditions.end() ? nullptr : &it->second;
}

}  // namespace detail

/// Fills bound_slot and size_limited. The bound slot comes from the loop's
/// exit condition (the head's, else the first body block that branches out
/// of the loop). A storage-bounded loop is limited when some other body
/// condition compares the same slot against a value the exit test does not
/// use. Loops not bounded by storage are treated as limited.
inline void annotate_loop_bounds(LoopInfo& loop, const Cfg& cfg, const Execution& ex) {
    const BasicBlock* exit_block = nullptr;
    if (detail::block_conditions(ex, cfg.blocks[loop.head])) {
        exit_block = &cfg.blocks[loop.head];
    } else {
        for (BlockId b : loop.body) {
            if (!detail::block_conditions(ex, cfg.blocks[b])) continue;
            const auto succ = cfg.successors(b);
            if (std::any_of(succ.begin(), succ.end(), [&](BlockId s) { return !loop.contains(s); })) {
                exit_block = &cfg.blocks[b];
                break;
            }
        }
    }
    loop.bound_slot.reset();
    loop.size_limited = true;
    if (!exit_block) return;
    const auto& exit_conds = *detail::block_conditions(ex, *exit_block);
    unsigned best_depth = 0;
    for (const auto& c : exit_conds) detail::innermost_sload(c, 0, loop.bound_slot, best_depth);
    if (!loop.bound_slot) return;

    std::vector<Expr> exit_operands;
    for (const auto& c : exit_conds) detail::compared_against(c, *loop.bound_slot, exit_operands);
    loop.size_limited = false;
    for (BlockId b : loop.body) {
        if (b == exit_block->id) continue;
        const auto* conds = detail::block_conditions(ex, cfg.blocks[b]);
        if (!conds) continue;
        for (const auto& c : *conds) {
            std::vector<Expr> others;
            detail::compared_against(c, *loop.bound_slot, others);
            for (const auto& o : others) {
                if (std::find(exit_operands.begin(), exit_operands.end(), o) == exit_operands.end()) {
                    loop.size_limited = true;
                    return;
                }
            }
        }
    }
}

inline std::vector<LoopInfo> detect_loops(const Cfg& cfg, const Execution& ex, bool* truncated = nullptr,
                                          std::uint64_t visit_budget = 2'000'000) {
    LoopSearch search = find_loops(cfg, visit_budget);
    for (auto& l : search.loops) annotate_loop_bounds(l, cfg, ex);
    if (truncated) *truncated = search.truncated;
    return std::move(search.loops);
}

// ---------------------------------------------------------------------------
// Functions

struct FunctionInfo {
    std::optional<std::uint32_t> selector;  // absent for the fallback
    BlockId entry_block = 0;
    bool is_payable = false;
    bool is_fallback = false;
};

namespace detail {

inline std::optional<std::uint32_t> selector_of(const Expr& cond) {
    std::optional<std::uint32_t> found;
    walk(cond, [&](const Expr& n) {
        if (!n.is_apply() || n.tag() != Tag(op::EQ) || n.args().size() != 2) return false;
        for (int side = 0; side < 2; ++side) {
            const Expr& c = n.args()[side];
            const Expr& other = n.args()[1 - side];
            if (c.is_concrete() && c.value() <= Word(0xFFFFFFFFULL) && contains_tag(other, Tag(op::CALLDATALOAD))) {
                found = static_cast<std::uint32_t>(c.value().low_u64());
                return true;
            }
        }
        return false;
    });
    return found;
}

// Follows single-successor fall/jump chains from `b`, at most `limit` hops.
inline BlockId follow_chain(const Cfg& cfg, BlockId b, int limit = 16) {
    for (int i = 0; i < limit; ++i) {
        const auto& blk = cfg.blocks[b];
        if (blk.exit_type == ExitType::conditional || blk.exit_type == ExitType::terminal) break;
        const auto succ = cfg.successors(b);
        if (succ.size() != 1 || succ[0] == b) break;
        b = succ[0];
    }
    return b;
}

inline bool ends_in_exception(const Cfg& cfg, std::span<const Instruction> instrs, BlockId b) {
    const auto& blk = cfg.blocks[follow_chain(cfg, b)];
    if (blk.exit_type != ExitType::terminal) return false;
    const auto op = instrs[blk.first + blk.count - 1].opcode;
    return op == op::REVERT || opcode_spec(op).mnemonic == "INVALID";
}

// Number of ISZERO wrappers around CALLVALUE, if cond has that shape.
inline std::optional<unsigned> callvalue_guard_depth(const Expr& cond) {
    unsigned k = 0;
    const Expr* e = &cond;
    while (e->is_apply() && e->tag() == Tag(op::ISZERO) && e->args().size() == 1) {
        ++k;
        e = &e->args()[0];
    }
    if (k >= 1 && e->is_symbol() && e->tag() == Tag(op::CALLVALUE)) return k;
    return std::nullopt;
}

}  // namespace detail

/// Non-payable iff the function's entry region rejects Ether: ISZERO(CALLVALUE)
/// feeds a JUMPI whose failing side reverts. An entry region that always
/// reverts (the compiler's default fallback) is not payable either.
inline bool is_payable(const FunctionInfo& fn, const Cfg& cfg, std::span<const Instruction> instrs, const Execution& ex) {
    if (!cfg.reachable(fn.entry_block)) return false;
    const BlockId region = detail::follow_chain(cfg, fn.entry_block);
    const auto& blk = cfg.blocks[region];
    if (blk.exit_type == ExitType::terminal) return !detail::ends_in_exception(cfg, instrs, region);
    const auto* conds = detail::block_conditions(ex, blk);
    if (!conds) return true;
    for (const auto& c : *conds) {
        const auto depth = detail::callvalue_guard_depth(c);
        if (!depth) continue;
        // Odd depth: the jump is taken when no value was sent, so the fall side fails.
        const bool fall_fails = *depth % 2 == 1;
        for (const auto& e : cfg.out_edges(region)) {
            const bool is_fall = e.kind == EdgeKind::fall;
            if (is_fall == fall_fails && detail::ends_in_exception(cfg, instrs, e.to)) return false;
        }
    }
    return true;
}

/// Dispatcher recognition: conditional jumps before the first JUMPDEST whose
/// condition compares a 4-byte constant with calldata start functions; the
/// first JUMPDEST is the fallback.
inline std::vector<FunctionInfo> detect_functions(const Cfg& cfg, std::span<const Instruction> instrs, const Execution& ex) {
    std::vector<FunctionInfo> out;
    if (cfg.blocks.empty()) return out;
    auto first_jd = std::find_if(instrs.begin(), instrs.end(), [](const Instruction& i) { return i.opcode == op::JUMPDEST; });
    if (first_jd != instrs.end()) {
        std::set<std::uint32_t> seen;
        for (BlockId id : cfg.nodes) {
            const auto& b = cfg.blocks[id];
            if (b.start_offset >= first_jd->offset) break;
            const auto* conds = detail::block_conditions(ex, b);
            if (!conds) continue;
            for (const auto& c : *conds) {
                const auto sel = detail::selector_of(c);
                if (!sel || seen.contains(*sel)) continue;
                for (const auto& e : cfg.out_edges(id)) {
                    if (e.kind != EdgeKind::conditional_jump) continue;
                    FunctionInfo fn;
                    fn.selector = *sel;
                    fn.entry_block = e.to;
                    out.push_back(fn);
                    seen.insert(*sel);
                    break;
                }
            }
        }
    }
    if (out.empty()) {
        FunctionInfo fn;
        fn.entry_block = cfg.entry;
        out.push_back(fn);
    } else if (const BasicBlock* fb = cfg.block_starting_at(first_jd->offset)) {
        FunctionInfo fn;
        fn.entry_block = fb->id;
        fn.is_fallback = true;
        out.push_back(fn);
    }
    for (auto& fn : out) fn.is_payable = is_payable(fn, cfg, instrs, ex);
    return out;
}

// ---------------------------------------------------------------------------
// Feature dump

struct Features {
    std::vector<CallKind> call_kinds;  // parallel to Execution::calls
    std::vector<LoopInfo> loops;
    bool loops_truncated = false;
    std::vector<FunctionInfo> functions;
};

inline Features detect_features(const Cfg& cfg, std::span<const Instruction> instrs, const Execution& ex,
                                std::uint64_t loop_visit_budget = 2'000'000) {
    Features f;
    f.call_kinds.reserve(ex.calls.size());
    for (const auto& c : ex.calls) f.call_kinds.push_back(classify_call(c));
    f.loops = detect_loops(cfg, ex, &f.loops_truncated, loop_visit_budget);
    f.functions = detect_functions(cfg, instrs, ex);
    return f;
}

inline std::string selector_hex(std::uint32_t sel) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s = "0x";
    for (int i = 7; i >= 0; --i) s.push_back(kDigits[(sel >> (i * 4)) & 0xF]);
    return s;
}

inline nlohmann::json to_json(const Features& f, const Execution& ex) {
    using nlohmann::json;
    // One entry per call offset; the kind is the strongest seen on any path.
    std::map<std::uint32_t, std::pair<CallFamily, CallKind>> sites;
    for (std::size_t i = 0; i < ex.calls.size(); ++i) {
        auto [it, inserted] = sites.try_emplace(ex.calls[i].offset, ex.calls[i].family, f.call_kinds[i]);
        if (!inserted && f.call_kinds[i] > it->second.second) it->second.second = f.call_kinds[i];
    }
    json calls = json::array();
    for (const auto& [off, fk] : sites) {
        calls.push_back({{"offset", off}, {"family", std::string(to_string(fk.first))}, {"kind", std::string(to_string(fk.second))}});
    }
    json loops = json::array();
    for (const auto& l : f.loops) {
        json j = {{"head", l.head}, {"body", l.body}, {"size_limited", l.size_limited}};
        j["bound_slot"] = l.bound_slot ? json(render(*l.bound_slot)) : json(nullptr);
        loops.push_back(std::move(j));
    }
    json fns = json::array();
    for (const auto& fn : f.functions) {
        fns.push_back({{"selector", fn.selector ? json(selector_hex(*fn.selector)) : json(nullptr)},
                       {"entry_block", fn.entry_block},
                       {"is_payable", fn.is_payable},
                       {"is_fallback", fn.is_fallback}});
    }
    return {{"calls", std::move(calls)}, {"loops", std::move(loops)}, {"functions", std::move(fns)}};
}

}  // namespace evmscan
