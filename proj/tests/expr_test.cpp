// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.

#include <random>

#include <gtest/gtest.h>

#include "evmscan/expr.hpp"
#include "support/oracles.hpp"

using namespace evmscan;

namespace {

Expr c(std::uint64_t v) { return Expr::constant(Word(v)); }
Expr sym(std::uint8_t code) { return Expr::symbol(Tag(code)); }
Expr ap(std::uint8_t code, std::vector<Expr> args) { return Expr::apply(Tag(code), std::move(args)); }

}  // namespace

TEST(Expr, Render) {
    const Expr num = Expr::symbol(Tag(op::CALLDATALOAD), 0, {c(4)});
    EXPECT_EQ(render(ap(op::ISZERO, {ap(op::GT, {num, c(10)})})), "ISZERO(GT(CALLDATALOAD(0x4), 0xa))");
    EXPECT_EQ(render(sym(op::CALLER)), "CALLER");
    EXPECT_EQ(render(Expr::symbol(Tag(op::GAS), 7)), "GAS#7");
    EXPECT_EQ(render(Expr::symbol(Tag::call_result(), 2)), "CALLRESULT#2");
    EXPECT_EQ(render(Expr()), "0x0");
}

TEST(Expr, StructuralEquality) {
    EXPECT_EQ(ap(op::ADD, {sym(op::CALLER), c(1)}), ap(op::ADD, {sym(op::CALLER), c(1)}));
    EXPECT_NE(ap(op::ADD, {sym(op::CALLER), c(1)}), ap(op::ADD, {c(1), sym(op::CALLER)}));
    EXPECT_NE(Expr::symbol(Tag(op::GAS), 1), Expr::symbol(Tag(op::GAS), 2));
    EXPECT_EQ(ap(op::ADD, {sym(op::CALLER), c(1)}).hash(), ap(op::ADD, {sym(op::CALLER), c(1)}).hash());
    // Provenance does not take part.
    EXPECT_EQ(fold(ap(op::ADD, {c(2), c(3)})), c(5));
}

TEST(Expr, FoldKeepsProvenance) {
    const Expr gas = fold(ap(op::MUL, {c(2300), ap(op::ISZERO, {c(0)})}));
    ASSERT_TRUE(gas.is_concrete());
    EXPECT_EQ(gas.value(), Word(2300));
    ASSERT_NE(gas.folded_from(), nullptr);
    EXPECT_EQ(render(*gas.folded_from()), "MUL(0x8fc, 0x1)");

    const Expr zero = fold(ap(op::MUL, {c(2300), ap(op::ISZERO, {c(9)})}));
    EXPECT_TRUE(zero.is_zero());
    EXPECT_FALSE(contains_literal(zero, Word(2300)));
    EXPECT_TRUE(mentions_literal(zero, Word(2300)));
}

TEST(Expr, PartialFold) {
    const Expr e = fold(ap(op::ADD, {sym(op::CALLER), ap(op::MUL, {c(3), c(4)})}));
    EXPECT_EQ(render(e), "ADD(CALLER, 0xc)");
    EXPECT_TRUE(fold(sym(op::CALLER)).is_symbol());
    // Untouched trees come back as the same node.
    const Expr same = ap(op::ADD, {sym(op::CALLER), sym(op::ORIGIN)});
    EXPECT_EQ(fold(same).identity(), same.identity());
}

TEST(Expr, Queries) {
    const Expr slot = c(1);
    const Expr e = ap(op::LT, {Expr::symbol(Tag(op::SLOAD), 0, {slot}),
                               ap(op::ADD, {Expr::symbol(Tag(op::SLOAD), 0, {slot}), Expr::symbol(Tag(op::SLOAD), 0, {c(7)})})});
    EXPECT_EQ(slot_ids(e), (std::vector<Expr>{c(1), c(7)}));
    EXPECT_TRUE(contains_tag(e, Tag(op::SLOAD)));
    EXPECT_FALSE(contains_tag(e, Tag(op::CALLER)));
    EXPECT_TRUE(contains_literal(e, Word(7)));
    EXPECT_TRUE(contains_symbol(Expr::symbol(Tag(op::GAS), 4), Tag(op::GAS), 4));
    EXPECT_FALSE(contains_symbol(Expr::symbol(Tag(op::GAS), 4), Tag(op::GAS), 5));
    EXPECT_TRUE(is_statically_false(c(0)));
    EXPECT_FALSE(is_statically_false(sym(op::CALLVALUE)));
}

TEST(Expr, ContextCapsAndFreshIds) {
    ExprContext ctx(8, 64);
    Expr e = sym(op::CALLER);
    int opaque = 0;
    for (int i = 0; i < 20; ++i) {
        e = ctx.apply(Tag(op::ADD), {e, sym(op::ORIGIN)});
        EXPECT_LE(e.depth(), 8u);
        if (e.tag() == Tag::opaque()) ++opaque;
    }
    // Depth 8 is exceeded at the 8th application, then every 7 after.
    EXPECT_EQ(opaque, 2);
    const Expr a = ctx.fresh(Tag(op::GAS));
    const Expr b = ctx.fresh(Tag(op::GAS));
    EXPECT_NE(a, b);
    EXPECT_GT(b.id(), a.id());
    EXPECT_EQ(ctx.apply(Tag(op::ADD), {c(1), c(2)}), c(3));
}

TEST(Expr, EvaluateOpMatchesOracle) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 3000; ++i) {
        const auto& ops = oracle::pure_ops();
        const std::uint8_t code = ops[rng() % ops.size()];
        std::vector<oracle::Big> big;
        std::vector<Word> w;
        for (unsigned k = 0; k < oracle::arity(code); ++k) {
            big.push_back(oracle::random_value(rng));
            w.push_back(oracle::to_word(big.back()));
        }
        const auto got = evaluate_op(Tag(code), w);
        ASSERT_TRUE(got);
        ASSERT_EQ(oracle::from_word(*got), oracle::apply_op(code, big)) << opcode_spec(code).mnemonic;
    }
    EXPECT_FALSE(evaluate_op(Tag(op::SLOAD), std::vector<Word>{Word(1)}));
    EXPECT_FALSE(evaluate_op(Tag(op::ADD), std::vector<Word>{Word(1)}));
}

TEST(Expr, FoldMatchesOracleUnderRandomAssignments) {
    std::mt19937_64 rng(4242);
    int folded_to_constant = 0;
    for (int i = 0; i < 1500; ++i) {
        const Expr e = oracle::random_expr(rng, 1 + static_cast<unsigned>(rng() % 6), 3);
        oracle::Assignment asg;
        for (std::uint32_t id = 1; id <= 3; ++id) asg[{Tag::env().code(), id}] = oracle::random_value(rng);
        const oracle::Big want = oracle::evaluate(e, asg);
        const Expr f = fold(oracle::substitute(e, asg));
        ASSERT_TRUE(f.is_concrete()) << render(e);
        ASSERT_EQ(oracle::from_word(f.value()), want) << render(e);
        // Folding first, then substituting, agrees as well.
        const Expr g = fold(oracle::substitute(fold(e), asg));
        ASSERT_TRUE(g.is_concrete());
        ASSERT_EQ(oracle::from_word(g.value()), want) << render(e);
        if (fold(e).is_concrete()) ++folded_to_constant;
    }
    EXPECT_GT(folded_to_constant, 0);
}
