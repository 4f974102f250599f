// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <algorithm>
#include <array>
#include <chrono>
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
#include "evmscan/disassembler.hpp"
#include "evmscan/executor.hpp"
#include "evmscan/features.hpp"
#include "evmscan/keccak.hpp"

namespace evmscan {

enum class DefectKind : std::uint8_t { TSD, DuEI, SBE, RE, NC, GC, UEC, BID };

inline constexpr std::array<DefectKind, 8> kAllDefectKinds = {DefectKind::TSD, DefectKind::DuEI, DefectKind::SBE,
                                                              DefectKind::RE,  DefectKind::NC,   DefectKind::GC,
                                                              DefectKind::UEC, DefectKind::BID};

inline std::string_view to_string(DefectKind k) {
    switch (k) {
        case DefectKind::TSD: return "TSD";
        case DefectKind::DuEI: return "DuEI";
        case DefectKind::SBE: return "SBE";
        case DefectKind::RE: return "RE";
        case DefectKind::NC: return "NC";
        case DefectKind::GC: return "GC";
        case DefectKind::UEC: return "UEC";
        case DefectKind::BID: return "BID";
    }
    return "?";
}

inline std::optional<DefectKind> defect_kind_from_string(std::string_view s) {
    for (DefectKind k : kAllDefectKinds) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

/// 1 = can be exploited by an attacker, 2 = can cause loss of Ether or a
/// stuck contract, 3 = quality (gas, robustness) issue.
inline int impact_level(DefectKind k) {
    switch (k) {
        case DefectKind::TSD:
        case DefectKind::RE: return 1;
        case DefectKind::DuEI:
        case DefectKind::SBE:
        case DefectKind::NC: return 2;
        case DefectKind::GC:
        case DefectKind::UEC:
        case DefectKind::BID: return 3;
    }
    return 3;
}

struct Finding {
    DefectKind kind = DefectKind::TSD;
    std::vector<std::uint32_t> sites;  // bytecode offsets; sites[0] is the primary site
    std::string note;

    std::uint32_t primary_site() const { return sites.empty() ? 0 : sites.front(); }
    friend bool operator==(const Finding&, const Finding&) = default;
};

struct AnalysisConfig {
    ExecConfig exec;
    bool include_timestamp_in_bid = false;
    std::uint64_t loop_visit_budget = 2'000'000;
};

/// Everything the rules look at.
struct Analysis {
    Bytes code;
    std::vector<Instruction> instructions;
    Execution exec;
    Features features;
    AnalysisConfig config;
};

// ---------------------------------------------------------------------------
// Rules

namespace detail {

inline bool address_like(const Expr& e) {
    if (e.is_concrete()) {
        const Word& v = e.value();
        return v.bit_length() > 32 && v.bit_length() <= 160;
    }
    static constexpr std::array<Tag, 3> kTags = {Tag(op::CALLER), Tag(op::ORIGIN), Tag(op::SLOAD)};
    return contains_any_tag(e, kTags);
}

inline bool is_exception_block(const Analysis& a, BlockId b) {
    const auto& blk = a.exec.cfg.blocks[b];
    if (blk.exit_type != ExitType::terminal) return false;
    const auto code = a.instructions[blk.first + blk.count - 1].opcode;
    return code == op::REVERT || opcode_spec(code).mnemonic == "INVALID";
}

inline std::set<std::uint32_t> money_call_offsets_in(const Analysis& a, BlockId b) {
    std::set<std::uint32_t> out;
    for (std::size_t i = 0; i < a.exec.calls.size(); ++i) {
        if (a.exec.calls[i].containing_block == b && is_money(a.features.call_kinds[i])) out.insert(a.exec.calls[i].offset);
    }
    return out;
}

}  // namespace detail

/// tx.origin compared for equality with an address-like value.
inline std::vector<Finding> detect_tsd(const Analysis& a) {
    std::vector<Finding> out;
    for (const auto& ins : a.instructions) {
        if (ins.opcode != op::EQ) continue;
        const auto* events = a.exec.events.at(ins.offset);
        if (!events) continue;
        for (const auto& ev : *events) {
            if (ev.stack.empty()) continue;
            const Expr& top = ev.stack.back();
            if (!top.is_apply() || top.tag() != Tag(op::EQ) || top.args().size() != 2) continue;
            const Expr& l = top.args()[0];
            const Expr& r = top.args()[1];
            const bool hit = (contains_tag(l, Tag(op::ORIGIN)) && detail::address_like(r)) ||
                             (contains_tag(r, Tag(op::ORIGIN)) && detail::address_like(l));
            if (hit) {
                out.push_back({DefectKind::TSD, {ins.offset}, "tx.origin compared with " + render(top)});
                break;
            }
        }
    }
    return out;
}

/// A money call inside a loop whose failure aborts the whole transaction.
inline std::vector<Finding> detect_duei(const Analysis& a) {
    std::vector<Finding> out;
    std::set<std::uint32_t> seen;
    const auto& cfg = a.exec.cfg;
    for (const auto& loop : a.features.loops) {
        for (BlockId b : loop.body) {
            if (cfg.blocks[b].exit_type != ExitType::conditional) continue;
            const auto calls = detail::money_call_offsets_in(a, b);
            if (calls.empty()) continue;
            const auto succ = cfg.successors(b);
            if (!std::any_of(succ.begin(), succ.end(), [&](BlockId s) { return detail::is_exception_block(a, s); })) continue;
            for (auto off : calls) {
                if (!seen.insert(off).second) continue;
                out.push_back({DefectKind::DuEI, {off, cfg.blocks[loop.head].start_offset},
                               "money call in loop reverts on failure"});
            }
        }
    }
    return out;
}

/// Strict equality on a contract balance inside a branch condition.
inline std::vector<Finding> detect_sbe(const Analysis& a) {
    std::vector<Finding> out;
    for (const auto& [off, conds] : a.exec.conditions) {
        for (const auto& c : conds) {
            const bool hit = detail::walk(c, [](const Expr& n) {
                if (!n.is_apply() || n.tag() != Tag(op::EQ)) return false;
                return std::any_of(n.args().begin(), n.args().end(),
                                   [](const Expr& x) { return contains_tag(x, Tag(op::BALANCE)); });
            });
            if (hit) {
                out.push_back({DefectKind::SBE, {off}, "branch on " + render(c)});
                break;
            }
        }
    }
    return out;
}

/// Block entries of the recognised functions.
inline std::set<BlockId> function_entries(const Analysis& a) {
    std::set<BlockId> out;
    for (const auto& fn : a.features.functions) out.insert(fn.entry_block);
    return out;
}

/// Gas-unlimited Ether transfer guarded by storage that is only updated later.
inline std::vector<Finding> detect_re(const Analysis& a) {
    std::vector<Finding> out;
    std::set<std::uint32_t> seen;
    const auto entries = function_entries(a);
    for (std::size_t i = 0; i < a.exec.calls.size(); ++i) {
        if (a.features.call_kinds[i] != CallKind::GasUnlimitedMoney) continue;
        const auto& site = a.exec.calls[i];
        if (seen.contains(site.offset)) continue;
        std::size_t from = 0;
        for (std::size_t k = site.path.size(); k-- > 0;) {
            if (entries.contains(site.path[k])) {
                from = k;
                break;
            }
        }
        std::optional<Expr> stale;
        for (const auto& pc : site.path_conditions) {
            if (pc.path_index < from) continue;
            for (const auto& slot : slot_ids(pc.cond)) {
                if (!detail::sorted_contains(site.storage_writes_before, slot)) {
                    stale = slot;
                    break;
                }
            }
            if (stale) break;
        }
        if (stale) {
            seen.insert(site.offset);
            out.push_back({DefectKind::RE, {site.offset}, "guard reads storage slot " + render(*stale) + " not yet updated"});
        }
    }
    return out;
}

/// Storage-bounded loop without an explicit cap that sends Ether per iteration.
inline std::vector<Finding> detect_nc(const Analysis& a) {
    std::vector<Finding> out;
    const auto& cfg = a.exec.cfg;
    for (const auto& loop : a.features.loops) {
        if (loop.size_limited) continue;
        std::set<std::uint32_t> calls;
        for (BlockId b : loop.body) {
            auto c = detail::money_call_offsets_in(a, b);
            calls.insert(c.begin(), c.end());
        }
        if (calls.empty()) continue;
        Finding f{DefectKind::NC, {cfg.blocks[loop.head].start_offset}, {}};
        f.sites.insert(f.sites.end(), calls.begin(), calls.end());
        f.note = "loop bounded by " + (loop.bound_slot ? "SLOAD(" + render(*loop.bound_slot) + ")" : std::string("?"));
        out.push_back(std::move(f));
    }
    return out;
}

/// Accepts Ether but has no way to send any out. Code without a recognised
/// selector dispatcher has no functions to judge and is never greedy.
inline std::vector<Finding> detect_gc(const Analysis& a) {
    const auto& fns = a.features.functions;
    if (std::none_of(fns.begin(), fns.end(), [](const FunctionInfo& f) { return f.selector.has_value(); })) return {};
    std::vector<std::uint32_t> payable;
    for (const auto& fn : fns) {
        if (fn.is_payable) payable.push_back(a.exec.cfg.blocks[fn.entry_block].start_offset);
    }
    if (payable.empty()) return {};
    if (std::any_of(a.features.call_kinds.begin(), a.features.call_kinds.end(), is_money)) return {};
    if (std::any_of(a.instructions.begin(), a.instructions.end(),
                    [](const Instruction& i) { return i.opcode == op::SELFDESTRUCT; }))
        return {};
    std::sort(payable.begin(), payable.end());
    return {{DefectKind::GC, payable, "payable without any Ether-sending path"}};
}

/// Call whose success flag is never tested on any path.
inline std::vector<Finding> detect_uec(const Analysis& a) {
    std::map<std::uint32_t, bool> checked;
    for (const auto& site : a.exec.calls) checked[site.offset] |= site.result_checked;
    std::vector<Finding> out;
    for (const auto& [off, ok] : checked) {
        if (!ok) out.push_back({DefectKind::UEC, {off}, "call result not checked"});
    }
    return out;
}

/// Branch on block-state values a miner can influence.
inline std::vector<Finding> detect_bid(const Analysis& a) {
    std::vector<Tag> tags = {Tag(op::BLOCKHASH), Tag(op::COINBASE), Tag(op::NUMBER), Tag(op::DIFFICULTY),
                             Tag(op::GASLIMIT)};
    if (a.config.include_timestamp_in_bid) tags.push_back(Tag(op::TIMESTAMP));
    std::vector<Finding> out;
    for (const auto& [off, conds] : a.exec.conditions) {
        for (const auto& c : conds) {
            if (contains_any_tag(c, tags)) {
                out.push_back({DefectKind::BID, {off}, "branch on " + render(c)});
                break;
            }
        }
    }
    return out;
}

/// All rules; deduplicated by (kind, primary site) and sorted.
inline std::vector<Finding> identify_defects(const Analysis& a) {
    std::vector<Finding> all;
    for (auto rule : {detect_tsd, detect_duei, detect_sbe, detect_re, detect_nc, detect_gc, detect_uec, detect_bid}) {
        auto f = rule(a);
        all.insert(all.end(), std::make_move_iterator(f.begin()), std::make_move_iterator(f.end()));
    }
    std::stable_sort(all.begin(), all.end(), [](const Finding& x, const Finding& y) {
        return std::pair(x.kind, x.primary_site()) < std::pair(y.kind, y.primary_site());
    });
    all.erase(std::unique(all.begin(), all.end(),
                          [](const Finding& x, const Finding& y) {
                              return x.kind == y.kind && x.primary_site() == y.primary_site();
                          }),
              all.end());
    return all;
}

// ---------------------------------------------------------------------------
// Report

struct DefectReport {
    std::optional<std::string> address;
    std::string code_hash;
    std::vector<Finding> findings;
    double coverage = 1.0;
    std::size_t instructions_total = 0;
    long cyclomatic_complexity = 1;
    double duration_ms = 0;
    bool timed_out = false;
    AbortTally aborts;

    bool has(DefectKind k) const {
        return std::any_of(findings.begin(), findings.end(), [k](const Finding& f) { return f.kind == k; });
    }
    std::set<DefectKind> kinds() const {
        std::set<DefectKind> out;
        for (const auto& f : findings) out.insert(f.kind);
        return out;
    }
};

inline std::string code_hash_hex(std::span<const std::uint8_t> code) {
    static constexpr char kDigits[] = "0123456789abcdef";
    const auto h = keccak256(code);
    std::string s = "0x";
    for (auto b : h) {
        s.push_back(kDigits[b >> 4]);
        s.push_back(kDigits[b & 0xF]);
    }
    return s;
}

/// Full pipeline on raw runtime code.
inline Analysis run_analysis(Bytes code, const AnalysisConfig& config = {}) {
    Analysis a;
    a.config = config;
    a.code = std::move(code);
    a.instructions = decode(a.code);
    const auto blocks = build_blocks(a.instructions);
    a.exec = execute(blocks, a.instructions, a.code.size(), config.exec);
    a.features = detect_features(a.exec.cfg, a.instructions, a.exec, config.loop_visit_budget);
    return a;
}

inline DefectReport make_report(const Analysis& a) {
    DefectReport r;
    r.code_hash = code_hash_hex(a.code);
    r.findings = identify_defects(a);
    r.coverage = a.exec.coverage.coverage;
    r.instructions_total = a.exec.coverage.instructions_total;
    r.cyclomatic_complexity = cyclomatic_complexity(a.exec.cfg);
    r.timed_out = a.exec.timed_out;
    r.aborts = a.exec.aborts;
    return r;
}

inline DefectReport analyze(std::span<const std::uint8_t> code, const AnalysisConfig& config = {}) {
    const auto start = std::chrono::steady_clock::now();
    DefectReport r = make_report(run_analysis(Bytes(code.begin(), code.end()), config));
    r.duration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

inline nlohmann::json to_json(const AbortTally& t) {
    return {{"underflow", t.underflow},     {"overflow", t.overflow},         {"unresolved_jump", t.unresolved_jump},
            {"invalid_jump", t.invalid_jump}, {"visit_limit", t.visit_limit}, {"step_budget", t.step_budget},
            {"timeout", t.timeout}};
}

inline nlohmann::json to_json(const Finding& f) {
    return {{"kind", std::string(to_string(f.kind))},
            {"impact_level", impact_level(f.kind)},
            {"sites", f.sites},
            {"note", f.note}};
}

/// Report JSON. Timing is left out when `with_timing` is false so that
/// reports of the same code compare byte for byte.
inline nlohmann::json to_json(const DefectReport& r, bool with_timing = true) {
    nlohmann::json findings = nlohmann::json::array();
    for (const auto& f : r.findings) findings.push_back(to_json(f));
    nlohmann::json j = {{"code_hash", r.code_hash},
                        {"findings", std::move(findings)},
                        {"coverage", r.coverage},
                        {"instructions_total", r.instructions_total},
                        {"cyclomatic_complexity", r.cyclomatic_complexity},
                        {"timed_out", r.timed_out},
                        {"aborts", to_json(r.aborts)}};
    if (r.address) j["address"] = *r.address;
    if (with_timing) j["duration_ms"] = r.duration_ms;
    return j;
}

}  // namespace evmscan
