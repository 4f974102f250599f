// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.

#include <random>

#include <gtest/gtest.h>

#include "evmscan/assembler.hpp"
#include "evmscan/features.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace evmscan;

namespace {

struct Probe {
    std::vector<Instruction> ins;
    Execution ex;
    Features f;
};

Probe run(const Bytes& code) {
    Probe r;
    r.ins = decode(code);
    r.ex = execute(build_blocks(r.ins), r.ins, code.size());
    r.f = detect_features(r.ex.cfg, r.ins, r.ex);
    return r;
}

CallSite site(Expr gas, std::optional<Expr> value) {
    CallSite s;
    s.gas_expr = std::move(gas);
    s.value_expr = std::move(value);
    return s;
}

std::set<unsigned> heads(const std::vector<LoopInfo>& loops) {
    std::set<unsigned> out;
    for (const auto& l : loops) out.insert(l.head);
    return out;
}

}  // namespace

TEST(CallKinds, Classification) {
    const Expr callvalue = Expr::symbol(Tag(op::CALLVALUE));
    const Expr stipend = Expr::constant(Word(2300));
    EXPECT_EQ(classify_call(site(stipend, std::nullopt)), CallKind::NoMoney);
    EXPECT_EQ(classify_call(site(stipend, Expr::constant(Word(0)))), CallKind::NoMoney);
    EXPECT_EQ(classify_call(site(stipend, callvalue)), CallKind::GasLimitedMoney);
    EXPECT_EQ(classify_call(site(Expr::symbol(Tag(op::GAS), 3), callvalue)), CallKind::GasUnlimitedMoney);

    // send(v): gas = 2300 * ISZERO(v) folds away when v is known.
    const Expr folded = fold(Expr::apply(Tag(op::MUL), {Expr::constant(Word(2300)),
                                                         Expr::apply(Tag(op::ISZERO), {Expr::constant(Word(0))})}));
    ASSERT_TRUE(folded.is_concrete());
    EXPECT_EQ(classify_call(site(folded, Expr::constant(Word(5)))), CallKind::GasLimitedMoney);
    const Expr zero_gas = fold(Expr::apply(Tag(op::MUL), {Expr::constant(Word(2300)),
                                                           Expr::apply(Tag(op::ISZERO), {Expr::constant(Word(5))})}));
    EXPECT_TRUE(zero_gas.is_zero());
    EXPECT_EQ(classify_call(site(zero_gas, Expr::constant(Word(5)))), CallKind::GasLimitedMoney);
}

TEST(CallKinds, FixtureIdioms) {
    const Probe send = run(fixtures::uec().code());
    ASSERT_FALSE(send.ex.calls.empty());
    EXPECT_EQ(send.f.call_kinds[0], CallKind::GasLimitedMoney);
    const Probe value = run(fixtures::bank().code());
    std::set<CallKind> kinds(value.f.call_kinds.begin(), value.f.call_kinds.end());
    EXPECT_TRUE(kinds.contains(CallKind::GasUnlimitedMoney));
    EXPECT_TRUE(kinds.contains(CallKind::NoMoney));
    EXPECT_FALSE(kinds.contains(CallKind::GasLimitedMoney));
}

TEST(Loops, HandBuiltGraphs) {
    oracle::Graph g;
    for (int i = 0; i < 6; ++i) g.add();
    // 0 -> 1 -> 2 -> 1 (outer), 2 -> 3 -> 3 (self), 3 -> 1, 1 -> 4, 4 -> 5
    g.link(0, 1);
    g.link(1, 2);
    g.link(2, 1);
    g.link(2, 3);
    g.link(3, 3);
    g.link(3, 1);
    g.link(1, 4);
    g.link(4, 5);
    const auto search = find_loops(oracle::to_cfg(g));
    EXPECT_FALSE(search.truncated);
    EXPECT_EQ(heads(search.loops), (std::set<unsigned>{1, 3}));
    EXPECT_EQ(search.loops[0].body, (std::vector<BlockId>{1, 2, 3}));
    EXPECT_EQ(search.loops[1].body, (std::vector<BlockId>{3}));

    oracle::Graph dag;
    for (int i = 0; i < 4; ++i) dag.add();
    dag.link(0, 1);
    dag.link(0, 2);
    dag.link(1, 3);
    dag.link(2, 3);
    EXPECT_TRUE(find_loops(oracle::to_cfg(dag)).loops.empty());
}

TEST(Loops, MatchesCycleEnumerationOnReducibleGraphs) {
    std::mt19937_64 rng(11);
    int with_loops = 0;
    for (int i = 0; i < 300; ++i) {
        const auto g = oracle::random_reducible(rng, 4 + static_cast<unsigned>(rng() % 9));
        ASSERT_LE(g.n, 12u);
        const auto want = oracle::loop_headers(g);
        const auto got = find_loops(oracle::to_cfg(g));
        ASSERT_FALSE(got.truncated);
        EXPECT_EQ(heads(got.loops), want) << "graph " << i;
        if (!want.empty()) ++with_loops;
    }
    EXPECT_GT(with_loops, 50);
}

TEST(Loops, TruncationIsReported) {
    // A ladder of diamonds has exponentially many paths but no cycles.
    oracle::Graph g;
    unsigned cur = g.add();
    for (int i = 0; i < 30; ++i) {
        const unsigned a = g.add(), b = g.add(), j = g.add();
        g.link(cur, a);
        g.link(cur, b);
        g.link(a, j);
        g.link(b, j);
        cur = j;
    }
    EXPECT_FALSE(find_loops(oracle::to_cfg(g), 1000).truncated);
    // A back edge at the end keeps every prefix from being cached as cycle-free.
    g.link(cur, 0);
    EXPECT_TRUE(find_loops(oracle::to_cfg(g), 1000).truncated);
}

TEST(Loops, StorageBounds) {
    const Probe unbounded = run(fixtures::nc().code());
    ASSERT_EQ(unbounded.f.loops.size(), 1u);
    ASSERT_TRUE(unbounded.f.loops[0].bound_slot);
    EXPECT_EQ(render(*unbounded.f.loops[0].bound_slot), "0x0");
    EXPECT_FALSE(unbounded.f.loops[0].size_limited);

    for (const auto& f : {fixtures::duei(), fixtures::duei_fixed(), fixtures::nc_fixed()}) {
        const Probe capped = run(f.code());
        ASSERT_EQ(capped.f.loops.size(), 1u) << f.name;
        ASSERT_TRUE(capped.f.loops[0].bound_slot) << f.name;
        EXPECT_TRUE(capped.f.loops[0].size_limited) << f.name;
    }

    const Probe l14 = run(fixtures::reward_loop().code());
    ASSERT_EQ(l14.f.loops.size(), 1u);
    EXPECT_EQ(render(*l14.f.loops[0].bound_slot), "0x1");
    EXPECT_FALSE(l14.f.loops[0].size_limited);
}

TEST(Loops, SharedSubroutineLooksLikeALoop) {
    const Probe r = run(fixtures::shared_sub().code());
    ASSERT_EQ(r.f.loops.size(), 1u);
    const auto* sub = r.ex.cfg.blocks[r.f.loops[0].head].instructions(r.ins).data();
    EXPECT_EQ(sub->opcode, op::JUMPDEST);
    const Bytes code = fixtures::shared_sub().code();
    const auto labels = decode(code);
    // The head is the `sub` entry, the first JUMPDEST.
    auto first_jd = std::find_if(labels.begin(), labels.end(), [](const Instruction& i) { return i.opcode == op::JUMPDEST; });
    EXPECT_EQ(r.ex.cfg.blocks[r.f.loops[0].head].start_offset, first_jd->offset);
}

TEST(Functions, DispatcherAndPayability) {
    const Probe r = run(fixtures::bank().code());
    ASSERT_EQ(r.f.functions.size(), 3u);
    std::map<std::uint32_t, bool> payable;
    for (const auto& fn : r.f.functions) {
        if (fn.is_fallback) {
            EXPECT_FALSE(fn.is_payable) << "reverting fallback";
        } else {
            payable[*fn.selector] = fn.is_payable;
        }
    }
    EXPECT_EQ(payable, (std::map<std::uint32_t, bool>{{function_selector("Deposit()"), true},
                                                      {function_selector("CashOut(uint256)"), false}}));
}

TEST(Functions, NoDispatcher) {
    const Probe r = run(assemble("CALLER POP STOP"));
    ASSERT_EQ(r.f.functions.size(), 1u);
    EXPECT_FALSE(r.f.functions[0].selector);
    EXPECT_TRUE(r.f.functions[0].is_payable);

    const Probe guarded = run(assemble("CALLVALUE ISZERO PUSH @ok JUMPI PUSH1 0 DUP1 REVERT ok: JUMPDEST STOP"));
    EXPECT_FALSE(guarded.f.functions[0].is_payable);

    // Even nesting: the jump target is the failing side.
    const Probe even = run(assemble("CALLVALUE ISZERO ISZERO PUSH @bad JUMPI STOP bad: JUMPDEST INVALID"));
    EXPECT_FALSE(even.f.functions[0].is_payable);

    // A value check whose failing side does not revert is not a guard.
    const Probe soft = run(assemble("CALLVALUE ISZERO PUSH @ok JUMPI STOP ok: JUMPDEST STOP"));
    EXPECT_TRUE(soft.f.functions[0].is_payable);
}

TEST(Functions, SelectorHex) {
    EXPECT_EQ(selector_hex(0xa9059cbb), "0xa9059cbb");
    EXPECT_EQ(selector_hex(0x12), "0x00000012");
}

TEST(Features, JsonDump) {
    const Probe r = run(fixtures::reward_loop().code());
    const auto j = to_json(r.f, r.ex);
    EXPECT_EQ(j["loops"].size(), 1u);
    EXPECT_EQ(j["functions"].size(), 2u);
    EXPECT_FALSE(j["calls"].empty());
}
