// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "evmscan/cfg.hpp"
#include "evmscan/disassembler.hpp"
#include "evmscan/expr.hpp"

namespace evmscan {

struct ExecConfig {
    unsigned visit_limit = 3;           // per block, per path
    std::uint64_t step_budget = 1'000'000;
    unsigned depth_cap = 64;
    std::uint32_t size_cap = 4096;
    std::size_t max_events_per_instruction = 256;
    std::optional<std::uint64_t> branch_order_seed;  // randomize successor order (testing)
    std::chrono::milliseconds timeout{10'000};
};

/// Stack snapshot after one execution of an instruction (top of stack last).
struct StackEvent {
    std::uint32_t depth_before = 0;
    std::vector<Expr> stack;
};

struct StackEventLog {
    std::map<std::uint32_t, std::vector<StackEvent>> by_offset;
    std::uint64_t recorded = 0;
    std::uint64_t dropped = 0;  // beyond max_events_per_instruction

    const std::vector<StackEvent>* at(std::uint32_t offset) const {
        auto it = by_offset.find(offset);
        return it == by_offset.end() ? nullptr : &it->second;
    }
};

struct CoverageStats {
    std::size_t instructions_total = 0;
    std::size_t instructions_executed = 0;
    double coverage = 1.0;
};

enum class CallFamily : std::uint8_t { CALL, CALLCODE, DELEGATECALL, STATICCALL };

inline std::string_view to_string(CallFamily f) {
    switch (f) {
        case CallFamily::CALL: return "CALL";
        case CallFamily::CALLCODE: return "CALLCODE";
        case CallFamily::DELEGATECALL: return "DELEGATECALL";
        case CallFamily::STATICCALL: return "STATICCALL";
    }
    return "?";
}

/// A JUMPI condition on the current path. `path_index` is the position of the
/// JUMPI's block in the path.
struct PathCondition {
    std::uint32_t jumpi_offset = 0;
    std::size_t path_index = 0;
    Expr cond;
};

/// One dynamic traversal of a CALL-family instruction.
struct CallSite {
    std::uint32_t offset = 0;
    CallFamily family = CallFamily::CALL;
    Expr gas_expr;
    Expr recipient_expr;
    std::optional<Expr> value_expr;  // absent for DELEGATECALL / STATICCALL
    BlockId containing_block = 0;
    std::vector<PathCondition> path_conditions;
    std::vector<Expr> storage_writes_before;
    Expr result_symbol;
    bool result_checked = false;
    std::vector<BlockId> path;
};

struct AbortTally {
    std::uint64_t underflow = 0;
    std::uint64_t overflow = 0;
    std::uint64_t unresolved_jump = 0;
    std::uint64_t invalid_jump = 0;
    std::uint64_t visit_limit = 0;
    std::uint64_t step_budget = 0;
    std::uint64_t timeout = 0;

    friend bool operator==(const AbortTally&, const AbortTally&) = default;
};

enum class AbortReason : std::uint8_t { underflow, overflow, unresolved_jump, invalid_jump, visit_limit, step_budget, timeout };

/// Symbolic machine state of one path.
struct MachineState {
    std::vector<Expr> stack;
    std::vector<std::pair<Expr, Expr>> memory;  // folded offset -> word, sorted by offset hash
    std::vector<Expr> storage_writes;           // slots, sorted by hash, unique
    std::vector<BlockId> path;
    std::vector<std::pair<BlockId, std::uint16_t>> visit_counts;  // sorted by block
    std::vector<PathCondition> conditions;
    std::vector<Expr> condition_set;  // unique conditions, sorted by hash

    static constexpr std::size_t kMaxDepth = 1024;

    std::uint16_t visits(BlockId b) const {
        auto it = std::lower_bound(visit_counts.begin(), visit_counts.end(), std::make_pair(b, std::uint16_t{0}));
        return it != visit_counts.end() && it->first == b ? it->second : 0;
    }
    std::uint16_t bump_visits(BlockId b) {
        auto it = std::lower_bound(visit_counts.begin(), visit_counts.end(), std::make_pair(b, std::uint16_t{0}));
        if (it == visit_counts.end() || it->first != b) it = visit_counts.insert(it, {b, 0});
        return ++it->second;
    }
};

namespace detail {

inline bool sorted_insert_unique(std::vector<Expr>& v, const Expr& e) {
    auto it = std::lower_bound(v.begin(), v.end(), e.hash(), [](const Expr& x, std::size_t h) { return x.hash() < h; });
    for (auto j = it; j != v.end() && j->hash() == e.hash(); ++j) {
        if (*j == e) return false;
    }
    v.insert(it, e);
    return true;
}

inline bool sorted_contains(const std::vector<Expr>& v, const Expr& e) {
    auto it = std::lower_bound(v.begin(), v.end(), e.hash(), [](const Expr& x, std::size_t h) { return x.hash() < h; });
    for (; it != v.end() && it->hash() == e.hash(); ++it) {
        if (*it == e) return true;
    }
    return false;
}

inline bool concrete_u64(const Expr& e, std::uint64_t& out) {
    if (!e.is_concrete() || !e.value().fits_u64()) return false;
    out = e.value().low_u64();
    return true;
}

}  // namespace detail

enum class StepStatus : std::uint8_t { next, halt, jump, branch, abort };

struct StepOutcome {
    StepStatus status = StepStatus::next;
    AbortReason reason = AbortReason::underflow;
    Expr target;
    Expr cond;
};

/// Everything symbolic execution learns about one contract.
struct Execution {
    Cfg cfg;
    StackEventLog events;
    CoverageStats coverage;
    std::vector<CallSite> calls;
    std::map<std::uint32_t, std::vector<Expr>> conditions;  // JUMPI offset -> distinct conditions
    std::set<std::uint32_t> checked_call_results;             // CALLRESULT ids read by ISZERO
    AbortTally aborts;
    std::uint64_t steps = 0;
    std::uint64_t paths = 0;
    std::uint64_t pruned = 0;
    bool timed_out = false;
};

/// Depth-first symbolic exploration of the stack machine.
class SymbolicExecutor {
public:
    SymbolicExecutor(std::span<const Instruction> instrs, std::span<const BasicBlock> blocks,
                     std::size_t code_size, ExecConfig config = {})
        : instrs_(instrs), config_(config), ctx_(config.depth_cap, config.size_cap), code_size_(code_size) {
        result_.cfg.blocks.assign(blocks.begin(), blocks.end());
        executed_.assign(instrs.size(), false);
    }

    ExprContext& context() { return ctx_; }

    /// Executes one instruction against `s`. Records stack events, call sites
    /// and conditions into the execution result.
    StepOutcome step(MachineState& s, const Instruction& ins, BlockId block = 0) {
        const auto& spec = ins.spec();
        if (s.stack.size() < spec.pops) return abort(AbortReason::underflow);
        const auto depth_before = static_cast<std::uint32_t>(s.stack.size());
        StepOutcome out;
        auto pop = [&s] {
            Expr e = std::move(s.stack.back());
            s.stack.pop_back();
            return e;
        };
        auto push = [&s](Expr e) { s.stack.push_back(std::move(e)); };
        const std::uint8_t code = ins.opcode;

        if (op::is_push(code)) {
            push(Expr::constant(*ins.immediate));
        } else if (op::is_dup(code)) {
            push(Expr(s.stack[s.stack.size() - (code - op::DUP1 + 1)]));
        } else if (op::is_swap(code)) {
            std::swap(s.stack.back(), s.stack[s.stack.size() - (code - op::SWAP1 + 2)]);
        } else if (op::is_log(code)) {
            for (unsigned i = 0; i < spec.pops; ++i) pop();
        } else if (is_foldable_op(Tag(code))) {
            std::vector<Expr> args;
            args.reserve(spec.pops);
            for (unsigned i = 0; i < spec.pops; ++i) args.push_back(pop());
            if (code == op::ISZERO) note_result_checks(args[0]);
            push(ctx_.apply(Tag(code), std::move(args)));
        } else {
            switch (code) {
                case op::STOP:
                case op::INVALID:
                    out.status = StepStatus::halt;
                    break;
                case op::RETURN:
                case op::REVERT:
                    pop();
                    pop();
                    out.status = StepStatus::halt;
                    break;
                case op::SELFDESTRUCT:
                    pop();
                    out.status = StepStatus::halt;
                    break;
                case op::JUMPDEST:
                    break;
                case op::POP:
                    pop();
                    break;
                case op::JUMP:
                    out.status = StepStatus::jump;
                    out.target = pop();
                    break;
                case op::JUMPI:
                    out.status = StepStatus::branch;
                    out.target = pop();
                    out.cond = pop();
                    break;
                case op::PC:
                    push(Expr::constant(Word(ins.offset)));
                    break;
                case op::CODESIZE:
                    push(Expr::constant(Word(code_size_)));
                    break;
                case op::ADDRESS: case op::ORIGIN: case op::CALLER: case op::CALLVALUE: case op::CALLDATASIZE:
                case op::GASPRICE: case op::COINBASE: case op::TIMESTAMP: case op::NUMBER: case op::DIFFICULTY:
                case op::GASLIMIT:
                    push(Expr::symbol(Tag(code)));
                    break;
                case op::GAS: case op::MSIZE: case op::RETURNDATASIZE:
                    push(ctx_.fresh(Tag(code)));
                    break;
                case op::BALANCE: case op::CALLDATALOAD: case op::EXTCODESIZE: case op::EXTCODEHASH:
                case op::BLOCKHASH: case op::SLOAD:
                    push(ctx_.symbol(Tag(code), {pop()}, false));
                    break;
                case op::SSTORE: {
                    Expr slot = pop();
                    pop();
                    detail::sorted_insert_unique(s.storage_writes, slot);
                    break;
                }
                case op::MLOAD:
                    push(mload(s, pop()));
                    break;
                case op::MSTORE: {
                    Expr off = pop();
                    Expr val = pop();
                    mstore(s, off, std::move(val));
                    break;
                }
                case op::MSTORE8: {
                    Expr off = pop();
                    pop();
                    invalidate(s, off, Expr::constant(Word(1)));
                    break;
                }
                case op::SHA3: {
                    Expr off = pop();
                    Expr size = pop();
                    push(sha3(s, off, size));
                    break;
                }
                case op::CALLDATACOPY: case op::CODECOPY: case op::RETURNDATACOPY: {
                    Expr dst = pop();
                    pop();
                    Expr len = pop();
                    invalidate(s, dst, len);
                    break;
                }
                case op::EXTCODECOPY: {
                    pop();
                    Expr dst = pop();
                    pop();
                    Expr len = pop();
                    invalidate(s, dst, len);
                    break;
                }
                case op::CREATE: case op::CREATE2:
                    for (unsigned i = 0; i < spec.pops; ++i) pop();
                    push(ctx_.fresh(Tag(code)));
                    break;
                case op::CALL: case op::CALLCODE: case op::DELEGATECALL: case op::STATICCALL:
                    call(s, ins, block);
                    break;
                default:
                    // Undefined opcodes halt; the spec table marks them terminal.
                    out.status = StepStatus::halt;
                    break;
            }
        }
        if (s.stack.size() > MachineState::kMaxDepth) return abort(AbortReason::overflow);
        record_event(ins, depth_before, s.stack);
        return out;
    }

    /// Explores every feasible path from the entry block.
    Execution run() {
        const auto start = std::chrono::steady_clock::now();
        auto& cfg = result_.cfg;
        std::set<BlockId> reached;
        std::set<Edge> edges;
        if (!cfg.blocks.empty()) {
            std::mt19937_64 rng(config_.branch_order_seed.value_or(0));
            struct Work {
                BlockId block;
                MachineState state;
            };
            std::vector<Work> work;
            work.push_back({0, MachineState{}});
            while (!work.empty()) {
                Work item = std::move(work.back());
                work.pop_back();
                if (result_.timed_out) {
                    ++result_.aborts.timeout;
                    continue;
                }
                if (result_.steps >= config_.step_budget) {
                    ++result_.aborts.step_budget;
                    continue;
                }
                MachineState& s = item.state;
                const BlockId bid = item.block;
                if (s.bump_visits(bid) > config_.visit_limit) {
                    ++result_.aborts.visit_limit;
                    continue;
                }
                if (memo_dominated(bid, s)) {
                    ++result_.pruned;
                    continue;
                }
                reached.insert(bid);
                s.path.push_back(bid);

                const BasicBlock& b = cfg.blocks[bid];
                StepOutcome outcome;
                bool aborted = false;
                for (std::uint32_t k = 0; k < b.count; ++k) {
                    const Instruction& ins = instrs_[b.first + k];
                    executed_[b.first + k] = true;
                    if (++result_.steps % 1024 == 0 && std::chrono::steady_clock::now() - start > config_.timeout) {
                        result_.timed_out = true;
                    }
                    outcome = step(s, ins, bid);
                    if (outcome.status == StepStatus::abort) {
                        tally(outcome.reason);
                        aborted = true;
                        break;
                    }
                    if (outcome.status != StepStatus::next) break;
                }
                if (aborted) continue;

                std::vector<Work> next;
                auto follow = [&](Expr target, EdgeKind kind) {
                    std::uint64_t t = 0;
                    if (!detail::concrete_u64(target, t)) {
                        ++result_.aborts.unresolved_jump;
                        return;
                    }
                    const BasicBlock* dest = t <= UINT32_MAX ? cfg.block_starting_at(static_cast<std::uint32_t>(t)) : nullptr;
                    if (!dest || instrs_[dest->first].opcode != op::JUMPDEST) {
                        ++result_.aborts.invalid_jump;
                        return;
                    }
                    edges.insert({bid, dest->id, kind});
                    next.push_back({dest->id, s});
                };
                auto fall_through = [&] {
                    if (bid + 1 >= cfg.blocks.size()) return;  // running off the end halts
                    edges.insert({bid, bid + 1, EdgeKind::fall});
                    next.push_back({bid + 1, s});
                };

                switch (outcome.status) {
                    case StepStatus::halt:
                        ++result_.paths;
                        break;
                    case StepStatus::jump:
                        follow(outcome.target, EdgeKind::unconditional_jump);
                        break;
                    case StepStatus::branch: {
                        const Expr& cond = outcome.cond;
                        auto& seen = result_.conditions[b.end_offset];
                        if (std::find(seen.begin(), seen.end(), cond) == seen.end()) seen.push_back(cond);
                        s.conditions.push_back({b.end_offset, s.path.size() - 1, cond});
                        detail::sorted_insert_unique(s.condition_set, cond);
                        // Fall first so that the jump side is explored first.
                        if (!is_statically_false(fold(Expr::apply(Tag(op::ISZERO), {cond})))) fall_through();
                        if (!is_statically_false(cond)) follow(outcome.target, EdgeKind::conditional_jump);
                        break;
                    }
                    case StepStatus::next:
                        // Block ended without a jump or halt: fall into the next block.
                        fall_through();
                        if (bid + 1 >= cfg.blocks.size()) ++result_.paths;
                        break;
                    case StepStatus::abort:
                        break;
                }
                if (config_.branch_order_seed && next.size() > 1) std::shuffle(next.begin(), next.end(), rng);
                for (auto& n : next) work.push_back(std::move(n));
            }
        }
        cfg.nodes.assign(reached.begin(), reached.end());
        cfg.edges.assign(edges.begin(), edges.end());
        cfg.entry = 0;

        auto& cov = result_.coverage;
        cov.instructions_total = instrs_.size();
        cov.instructions_executed = static_cast<std::size_t>(std::count(executed_.begin(), executed_.end(), true));
        cov.coverage = cov.instructions_total == 0
                           ? 1.0
                           : static_cast<double>(cov.instructions_executed) / static_cast<double>(cov.instructions_total);
        for (auto& c : result_.calls) {
            c.result_checked = result_.checked_call_results.contains(c.result_symbol.id());
        }
        return std::move(result_);
    }

private:
    static StepOutcome abort(AbortReason r) {
        StepOutcome o;
        o.status = StepStatus::abort;
        o.reason = r;
        return o;
    }

    void tally(AbortReason r) {
        auto& a = result_.aborts;
        switch (r) {
            case AbortReason::underflow: ++a.underflow; break;
            case AbortReason::overflow: ++a.overflow; break;
            case AbortReason::unresolved_jump: ++a.unresolved_jump; break;
            case AbortReason::invalid_jump: ++a.invalid_jump; break;
            case AbortReason::visit_limit: ++a.visit_limit; break;
            case AbortReason::step_budget: ++a.step_budget; break;
            case AbortReason::timeout: ++a.timeout; break;
        }
    }

    void record_event(const Instruction& ins, std::uint32_t depth_before, const std::vector<Expr>& stack) {
        auto& v = result_.events.by_offset[ins.offset];
        if (v.size() >= config_.max_events_per_instruction) {
            ++result_.events.dropped;
            return;
        }
        v.push_back({depth_before, stack});
        ++result_.events.recorded;
    }

    void note_result_checks(const Expr& operand) {
        detail::walk(operand, [this](const Expr& n) {
            if (n.is_symbol() && n.tag() == Tag::call_result()) result_.checked_call_results.insert(n.id());
            return false;
        });
    }

    static bool same_offset(const Expr& a, const Expr& b) { return a == b; }

    Expr mload(const MachineState& s, const Expr& off) {
        for (const auto& [k, v] : s.memory) {
            if (same_offset(k, off)) return v;
        }
        return ctx_.fresh(Tag(op::MLOAD), {off});
    }

    // Drops entries overlapping [off, off+len). Non-concrete regions only drop exact key matches.
    static void invalidate(MachineState& s, const Expr& off, const Expr& len) {
        std::uint64_t o = 0, n = 0;
        if (detail::concrete_u64(off, o) && detail::concrete_u64(len, n)) {
            if (n == 0) return;
            std::erase_if(s.memory, [&](const auto& kv) {
                std::uint64_t k = 0;
                if (!detail::concrete_u64(kv.first, k)) return false;
                return k < o + n && o < k + 32;
            });
            return;
        }
        std::erase_if(s.memory, [&](const auto& kv) { return kv.first == off; });
    }

    static void mstore(MachineState& s, const Expr& off, Expr value) {
        invalidate(s, off, Expr::constant(Word(32)));
        auto it = std::lower_bound(s.memory.begin(), s.memory.end(), off.hash(),
                                   [](const auto& kv, std::size_t h) { return kv.first.hash() < h; });
        s.memory.insert(it, {off, std::move(value)});
    }

    Expr sha3(const MachineState& s, const Expr& off, const Expr& size) {
        std::uint64_t o = 0, n = 0;
        if (detail::concrete_u64(off, o) && detail::concrete_u64(size, n) && n % 32 == 0 && n <= 32 * 16) {
            std::vector<Expr> words;
            bool complete = true;
            for (std::uint64_t k = 0; k < n / 32 && complete; ++k) {
                const Expr key = Expr::constant(Word(o + 32 * k));
                complete = false;
                for (const auto& [mk, mv] : s.memory) {
                    if (mk == key) {
                        words.push_back(mv);
                        complete = true;
                        break;
                    }
                }
            }
            if (complete) return ctx_.symbol(Tag(op::SHA3), std::move(words), false);
        }
        return ctx_.fresh(Tag(op::SHA3), {off, size});
    }

    void call(MachineState& s, const Instruction& ins, BlockId block) {
        auto pop = [&s] {
            Expr e = std::move(s.stack.back());
            s.stack.pop_back();
            return e;
        };
        CallSite site;
        site.offset = ins.offset;
        site.containing_block = block;
        site.gas_expr = pop();
        site.recipient_expr = pop();
        switch (ins.opcode) {
            case op::CALL: site.family = CallFamily::CALL; break;
            case op::CALLCODE: site.family = CallFamily::CALLCODE; break;
            case op::DELEGATECALL: site.family = CallFamily::DELEGATECALL; break;
            default: site.family = CallFamily::STATICCALL; break;
        }
        if (ins.opcode == op::CALL || ins.opcode == op::CALLCODE) site.value_expr = pop();
        pop();  // input offset
        pop();  // input size
        Expr out_off = pop();
        Expr out_len = pop();
        invalidate(s, out_off, out_len);
        site.result_symbol = ctx_.fresh(Tag::call_result(), {});
        site.path_conditions = s.conditions;
        site.storage_writes_before = s.storage_writes;
        site.path = s.path;
        s.stack.push_back(site.result_symbol);
        result_.calls.push_back(std::move(site));
    }

    // A state is redundant when an identical state (ignoring visit counters)
    // already entered the block with no more visits spent on any block.
    bool memo_dominated(BlockId block, const MachineState& s) {
        std::size_t h = detail::hash_mix(block, s.stack.size());
        for (const auto& e : s.stack) h = detail::hash_mix(h, e.hash());
        for (const auto& [k, v] : s.memory) h = detail::hash_mix(detail::hash_mix(h, k.hash()), v.hash());
        for (const auto& e : s.storage_writes) h = detail::hash_mix(h, e.hash());
        for (const auto& e : s.condition_set) h = detail::hash_mix(h, e.hash());

        auto& bucket = memo_[h];
        for (auto& entry : bucket) {
            if (entry.block != block || entry.stack != s.stack || entry.memory != s.memory ||
                entry.storage_writes != s.storage_writes || entry.condition_set != s.condition_set)
                continue;
            for (const auto& counts : entry.counts) {
                const bool dominated = std::all_of(counts.begin(), counts.end(),
                                                   [&s](const auto& bc) { return s.visits(bc.first) >= bc.second; });
                if (dominated) return true;
            }
            entry.counts.push_back(s.visit_counts);
            return false;
        }
        bucket.push_back({block, s.stack, s.memory, s.storage_writes, s.condition_set, {s.visit_counts}});
        return false;
    }

    struct MemoEntry {
        BlockId block;
        std::vector<Expr> stack;
        std::vector<std::pair<Expr, Expr>> memory;
        std::vector<Expr> storage_writes;
        std::vector<Expr> condition_set;
        std::vector<std::vector<std::pair<BlockId, std::uint16_t>>> counts;
    };

    std::span<const Instruction> instrs_;
    ExecConfig config_;
    ExprContext ctx_;
    std::size_t code_size_;
    Execution result_;
    std::vector<bool> executed_;
    std::unordered_map<std::size_t, std::vector<MemoEntry>> memo_;
};

inline Execution execute(std::span<const BasicBlock> blocks, std::span<const Instruction> instrs,
                         std::size_t code_size, const ExecConfig& config = {}) {
    return SymbolicExecutor(instrs, blocks, code_size, config).run();
}

}  // namespace evmscan
