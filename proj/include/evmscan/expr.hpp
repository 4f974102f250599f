// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evmscan/opcodes.hpp"
#include "evmscan/word.hpp"

namespace evmscan {

/// Identifies which instruction produced an expression node. Values below 256
/// are opcode bytes; the rest are reserved for inputs that have no opcode.
class Tag {
public:
    static constexpr std::uint16_t kEnv = 0x100;         // external input (initial stack etc.)
    static constexpr std::uint16_t kCallResult = 0x101;  // success flag of a CALL-family instruction
    static constexpr std::uint16_t kOpaque = 0x102;      // expression dropped by the size/depth cap

    constexpr Tag() = default;
    constexpr Tag(std::uint8_t opcode) : code_(opcode) {}  // NOLINT(google-explicit-constructor)
    static constexpr Tag env() { return Tag(kEnv, 0); }
    static constexpr Tag call_result() { return Tag(kCallResult, 0); }
    static constexpr Tag opaque() { return Tag(kOpaque, 0); }

    constexpr std::uint16_t code() const { return code_; }
    constexpr bool is_opcode() const { return code_ < 0x100; }

    std::string_view name() const {
        switch (code_) {
            case kEnv: return "ENV";
            case kCallResult: return "CALLRESULT";
            case kOpaque: return "OPAQUE";
            default: return opcode_spec(static_cast<std::uint8_t>(code_)).mnemonic;
        }
    }

    friend constexpr bool operator==(Tag, Tag) = default;

private:
    constexpr Tag(std::uint16_t code, int) : code_(code) {}
    std::uint16_t code_ = 0;
};

enum class NodeKind : std::uint8_t { concrete, symbol, apply };

class Expr;

namespace detail {
struct Node;
}

/// Immutable symbolic 256-bit word: a constant, a symbol, or an operator
/// applied to arguments. Copies share structure.
///
/// Args are stored in pop order: args[0] is the operand that was on top of the
/// stack. Symbols with id 0 are fully determined by their tag and arguments
/// (CALLER, SLOAD(slot), ...); symbols that may differ between evaluations get
/// a unique nonzero id.
class Expr {
public:
    Expr() : Expr(constant(Word{})) {}

    static Expr constant(const Word& v);
    static Expr symbol(Tag tag, std::uint32_t id = 0, std::vector<Expr> args = {});
    static Expr apply(Tag tag, std::vector<Expr> args);

    NodeKind kind() const;
    bool is_concrete() const { return kind() == NodeKind::concrete; }
    bool is_symbol() const { return kind() == NodeKind::symbol; }
    bool is_apply() const { return kind() == NodeKind::apply; }
    bool is_zero() const { return is_concrete() && value().is_zero(); }

    const Word& value() const;
    Tag tag() const;
    std::uint32_t id() const;
    std::span<const Expr> args() const;
    std::size_t hash() const;
    unsigned depth() const;
    std::uint32_t size() const;

    /// For constants produced by fold: the operator application they replaced.
    const Expr* folded_from() const;

    const void* identity() const { return node_.get(); }

    /// Structural equality (ignores fold provenance).
    friend bool operator==(const Expr& a, const Expr& b);

private:
    friend Expr fold(const Expr&);
    explicit Expr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const detail::Node> node_;
};

using SymbolicValue = Expr;

namespace detail {

struct Node {
    NodeKind kind = NodeKind::concrete;
    Tag tag;
    Word value;
    std::uint32_t id = 0;
    std::vector<Expr> args;
    std::size_t hash = 0;
    unsigned depth = 1;
    std::uint32_t size = 1;
    std::optional<Expr> folded_from;
};

inline std::size_t hash_mix(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

inline std::shared_ptr<Node> make_node(NodeKind kind, Tag tag, const Word& value, std::uint32_t id,
                                       std::vector<Expr> args) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->tag = tag;
    n->value = value;
    n->id = id;
    std::size_t h = hash_mix(static_cast<std::size_t>(kind), tag.code());
    if (kind == NodeKind::concrete) {
        for (std::size_t i = 0; i < Word::kLimbs; ++i) h = hash_mix(h, std::hash<std::uint64_t>{}(value.limb(i)));
    }
    h = hash_mix(h, id);
    unsigned depth = 0;
    std::uint64_t size = 1;
    for (const auto& a : args) {
        h = hash_mix(h, a.hash());
        depth = std::max(depth, a.depth());
        size += a.size();
    }
    n->hash = h;
    n->depth = depth + 1;
    n->size = static_cast<std::uint32_t>(std::min<std::uint64_t>(size, UINT32_MAX));
    n->args = std::move(args);
    return n;
}

}  // namespace detail

inline Expr Expr::constant(const Word& v) { return Expr(detail::make_node(NodeKind::concrete, Tag{}, v, 0, {})); }
inline Expr Expr::symbol(Tag tag, std::uint32_t id, std::vector<Expr> args) {
    return Expr(detail::make_node(NodeKind::symbol, tag, Word{}, id, std::move(args)));
}
inline Expr Expr::apply(Tag tag, std::vector<Expr> args) {
    return Expr(detail::make_node(NodeKind::apply, tag, Word{}, 0, std::move(args)));
}

inline NodeKind Expr::kind() const { return node_->kind; }
inline const Word& Expr::value() const { return node_->value; }
inline Tag Expr::tag() const { return node_->tag; }
inline std::uint32_t Expr::id() const { return node_->id; }
inline std::span<const Expr> Expr::args() const { return node_->args; }
inline std::size_t Expr::hash() const { return node_->hash; }
inline unsigned Expr::depth() const { return node_->depth; }
inline std::uint32_t Expr::size() const { return node_->size; }
inline const Expr* Expr::folded_from() const { return node_->folded_from ? &*node_->folded_from : nullptr; }

inline bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    if (x.hash != y.hash || x.kind != y.kind || x.tag != y.tag || x.id != y.id || x.value != y.value ||
        x.args.size() != y.args.size())
        return false;
    for (std::size_t i = 0; i < x.args.size(); ++i) {
        if (!(x.args[i] == y.args[i])) return false;
    }
    return true;
}

struct ExprHash {
    std::size_t operator()(const Expr& e) const { return e.hash(); }
};

/// True for the operators fold knows how to evaluate.
inline bool is_foldable_op(Tag tag) {
    if (!tag.is_opcode()) return false;
    switch (static_cast<std::uint8_t>(tag.code())) {
        case op::ADD: case op::MUL: case op::SUB: case op::DIV: case op::SDIV: case op::MOD: case op::SMOD:
        case op::ADDMOD: case op::MULMOD: case op::EXP: case op::SIGNEXTEND: case op::LT: case op::GT:
        case op::SLT: case op::SGT: case op::EQ: case op::ISZERO: case op::AND: case op::OR: case op::XOR:
        case op::NOT: case op::BYTE: case op::SHL: case op::SHR: case op::SAR:
            return true;
        default:
            return false;
    }
}

/// Applies one EVM operator to concrete operands given in pop order.
inline std::optional<Word> evaluate_op(Tag tag, std::span<const Word> a) {
    if (!is_foldable_op(tag)) return std::nullopt;
    const auto code = static_cast<std::uint8_t>(tag.code());
    if (a.size() != opcode_spec(code).pops) return std::nullopt;
    auto b = [](bool v) { return v ? Word(1) : Word(0); };
    switch (code) {
        case op::ADD: return a[0] + a[1];
        case op::MUL: return a[0] * a[1];
        case op::SUB: return a[0] - a[1];
        case op::DIV: return udiv(a[0], a[1]);
        case op::SDIV: return sdiv(a[0], a[1]);
        case op::MOD: return umod(a[0], a[1]);
        case op::SMOD: return smod(a[0], a[1]);
        case op::ADDMOD: return addmod(a[0], a[1], a[2]);
        case op::MULMOD: return mulmod(a[0], a[1], a[2]);
        case op::EXP: return exp(a[0], a[1]);
        case op::SIGNEXTEND: return signextend(a[0], a[1]);
        case op::LT: return b(a[0] < a[1]);
        case op::GT: return b(a[0] > a[1]);
        case op::SLT: return b(slt(a[0], a[1]));
        case op::SGT: return b(slt(a[1], a[0]));
        case op::EQ: return b(a[0] == a[1]);
        case op::ISZERO: return b(a[0].is_zero());
        case op::AND: return a[0] & a[1];
        case op::OR: return a[0] | a[1];
        case op::XOR: return a[0] ^ a[1];
        case op::NOT: return ~a[0];
        case op::BYTE: return byte_at(a[0], a[1]);
        case op::SHL: return shl(a[0], a[1]);
        case op::SHR: return shr(a[0], a[1]);
        case op::SAR: return sar(a[0], a[1]);
        default: return std::nullopt;
    }
}

/// Bottom-up constant folding. Every application whose operands are all
/// constants is replaced by its value; the replaced application is kept as
/// provenance on the resulting constant.
inline Expr fold(const Expr& e) {
    if (e.is_concrete()) return e;
    bool changed = false;
    std::vector<Expr> args;
    args.reserve(e.args().size());
    for (const auto& a : e.args()) {
        args.push_back(fold(a));
        if (args.back().identity() != a.identity()) changed = true;
    }
    if (e.is_apply() && std::all_of(args.begin(), args.end(), [](const Expr& a) { return a.is_concrete(); })) {
        std::vector<Word> vals;
        vals.reserve(args.size());
        for (const auto& a : args) vals.push_back(a.value());
        if (auto v = evaluate_op(e.tag(), vals)) {
            auto n = detail::make_node(NodeKind::concrete, Tag{}, *v, 0, {});
            n->folded_from = changed ? Expr::apply(e.tag(), std::move(args)) : e;
            return Expr(std::move(n));
        }
    }
    if (!changed) return e;
    return e.is_apply() ? Expr::apply(e.tag(), std::move(args)) : Expr::symbol(e.tag(), e.id(), std::move(args));
}

/// The solver-free feasibility rule: only a constant zero is unsatisfiable.
inline bool is_statically_false(const Expr& cond) { return cond.is_zero(); }

namespace detail {
// Pre-order walk; the visitor returns true to stop early. Returns true if stopped.
template <class F>
bool walk(const Expr& e, F&& visit, bool through_provenance = false) {
    if (visit(e)) return true;
    for (const auto& a : e.args()) {
        if (walk(a, visit, through_provenance)) return true;
    }
    if (through_provenance) {
        if (const Expr* from = e.folded_from()) return walk(*from, visit, true);
    }
    return false;
}
}  // namespace detail

inline bool contains_tag(const Expr& e, Tag tag) {
    return detail::walk(e, [&](const Expr& n) { return !n.is_concrete() && n.tag() == tag; });
}

inline bool contains_any_tag(const Expr& e, std::span<const Tag> tags) {
    return detail::walk(e, [&](const Expr& n) {
        return !n.is_concrete() && std::find(tags.begin(), tags.end(), n.tag()) != tags.end();
    });
}

inline bool contains_literal(const Expr& e, const Word& value) {
    return detail::walk(e, [&](const Expr& n) { return n.is_concrete() && n.value() == value; });
}

/// Like contains_literal, but also searches the applications that fold
/// collapsed into constants.
inline bool mentions_literal(const Expr& e, const Word& value) {
    return detail::walk(e, [&](const Expr& n) { return n.is_concrete() && n.value() == value; }, true);
}

/// True if any symbol node with the given tag and id occurs in e.
inline bool contains_symbol(const Expr& e, Tag tag, std::uint32_t id) {
    return detail::walk(e, [&](const Expr& n) { return n.is_symbol() && n.tag() == tag && n.id() == id; });
}

/// Slot arguments of every SLOAD in e, deduplicated structurally, in pre-order.
inline std::vector<Expr> slot_ids(const Expr& e) {
    std::vector<Expr> out;
    detail::walk(e, [&](const Expr& n) {
        if (n.is_symbol() && n.tag() == Tag(op::SLOAD) && !n.args().empty()) {
            if (std::find(out.begin(), out.end(), n.args()[0]) == out.end()) out.push_back(n.args()[0]);
        }
        return false;
    });
    return out;
}

/// Functional notation, e.g. ISZERO(GT(CALLDATALOAD(0x4), 0xa)).
inline std::string render(const Expr& e) {
    if (e.is_concrete()) return e.value().to_hex();
    std::string s(e.tag().name());
    if (e.is_symbol() && e.id() != 0) s += "#" + std::to_string(e.id());
    if (!e.args().empty() || e.is_apply()) {
        s += "(";
        for (std::size_t i = 0; i < e.args().size(); ++i) {
            if (i) s += ", ";
            s += render(e.args()[i]);
        }
        s += ")";
    }
    return s;
}

/// Per-analysis factory for fresh symbol ids and capped applications.
class ExprContext {
public:
    explicit ExprContext(unsigned depth_cap = 64, std::uint32_t size_cap = 4096)
        : depth_cap_(depth_cap), size_cap_(size_cap) {}

    Expr fresh(Tag tag, std::vector<Expr> args = {}) { return Expr::symbol(tag, ++next_id_, std::move(args)); }

    /// Builds and folds an application; oversized results become fresh OPAQUE symbols.
    Expr apply(Tag tag, std::vector<Expr> args) {
        Expr e = fold(Expr::apply(tag, std::move(args)));
        if (e.depth() > depth_cap_ || e.size() > size_cap_) return fresh(Tag::opaque());
        return e;
    }

    /// Caps a symbol's argument list the same way.
    Expr symbol(Tag tag, std::vector<Expr> args, bool fresh_id) {
        Expr e = fresh_id ? fresh(tag, std::move(args)) : Expr::symbol(tag, 0, std::move(args));
        if (e.depth() > depth_cap_ || e.size() > size_cap_) return fresh(Tag::opaque());
        return e;
    }

    unsigned depth_cap() const { return depth_cap_; }
    std::uint32_t issued() const { return next_id_; }

private:
    unsigned depth_cap_;
    std::uint32_t size_cap_;
    std::uint32_t next_id_ = 0;
};

}  // namespace evmscan
