// evmscan: defect analysis for EVM runtime bytecode
// Copyright 2026 The evmscan Authors.
// Licensed under the Apache License, Version 2.0.
//
// Hand-assembled runtime code shaped like solc 0.4.x output.
#pragma once

#include <cstdio>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "evmscan/assembler.hpp"
#include "evmscan/defects.hpp"
#include "evmscan/keccak.hpp"

namespace fixtures {

using evmscan::DefectKind;

struct Fixture {
    std::string name;
    std::string source;
    std::set<DefectKind> expected;

    evmscan::Bytes code() const { return evmscan::assemble(source); }
};

inline std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", v);
    return buf;
}

inline const std::string kAddrMask = "0xffffffffffffffffffffffffffffffffffffffff";
inline const std::string kOneEther = "0x0de0b6b3a7640000";

inline std::string prelude() { return "PUSH1 0x80 PUSH1 0x40 MSTORE\n"; }

/// Selector dispatch; short calldata goes to `fallback:`, which must be the
/// first JUMPDEST after this.
inline std::string dispatch(const std::vector<std::pair<std::string, std::string>>& fns) {
    std::string s = "PUSH1 4 CALLDATASIZE LT PUSH @fallback JUMPI\n"
                    "PUSH4 0xffffffff PUSH29 0x0100000000000000000000000000000000000000000000000000000000\n"
                    "PUSH1 0 CALLDATALOAD DIV AND\n";
    for (const auto& [sig, label] : fns) {
        s += "DUP1 PUSH4 " + hex32(evmscan::function_selector(sig)) + " EQ PUSH @" + label + " JUMPI\n";
    }
    return s;
}

inline std::string reverting_fallback() { return "fallback: JUMPDEST PUSH1 0 DUP1 REVERT\n"; }

/// Function entry that rejects Ether. The selector stays on the stack.
inline std::string nonpayable(const std::string& label) {
    return label + ": JUMPDEST CALLVALUE DUP1 ISZERO PUSH @" + label + "_body JUMPI PUSH1 0 DUP1 REVERT\n" + label +
           "_body: JUMPDEST POP\n";
}

// [to, value] -> [ok], gas = 2300 * ISZERO(value)
inline const std::string kSend =
    "PUSH1 0 PUSH1 0 PUSH1 0 PUSH1 0 DUP5 DUP7 DUP7 ISZERO PUSH2 0x08fc MUL CALL SWAP2 POP POP\n";
// [to, value] -> [ok], forwards all gas
inline const std::string kCallValue = "PUSH1 0 PUSH1 0 PUSH1 0 PUSH1 0 DUP5 DUP7 GAS CALL SWAP2 POP POP\n";

/// Consumes [ok]; reverts on failure and continues at `label:`.
inline std::string require_ok(const std::string& label) {
    return "ISZERO ISZERO PUSH @" + label + " JUMPI PUSH1 0 DUP1 REVERT\n" + label + ": JUMPDEST\n";
}

// [to, value] -> []
inline std::string transfer(const std::string& label) { return kSend + require_ok(label); }

// ---------------------------------------------------------------------------
// Paired fixtures: the defective contract and its repaired variant.

inline Fixture tsd() {
    return {"tsd", prelude() + dispatch({{"withdrawAll(address)", "f"}}) + reverting_fallback() + nonpayable("f") +
                       "PUSH1 0 SLOAD PUSH20 " + kAddrMask + " AND ORIGIN EQ PUSH @auth JUMPI PUSH1 0 DUP1 REVERT\n"
                       "auth: JUMPDEST PUSH20 " + kAddrMask + " PUSH1 4 CALLDATALOAD AND ADDRESS BALANCE\n" +
                       transfer("paid") + "STOP\n",
            {DefectKind::TSD}};
}

inline Fixture tsd_fixed() {
    return {"tsd_fixed", prelude() + dispatch({{"withdrawAll(address)", "f"}}) + reverting_fallback() + nonpayable("f") +
                             "PUSH1 0 SLOAD PUSH20 " + kAddrMask + " AND CALLER EQ PUSH @auth JUMPI PUSH1 0 DUP1 REVERT\n"
                             "auth: JUMPDEST PUSH20 " + kAddrMask + " PUSH1 4 CALLDATALOAD AND ADDRESS BALANCE\n" +
                             transfer("paid") + "STOP\n",
            {}};
}

// for (i = 0; i < members.length; i++) { <cap>; <pay members[i]> }
inline std::string member_loop(const std::string& cap, const std::string& pay) {
    return "PUSH1 0\n"
           "head: JUMPDEST PUSH1 0 SLOAD DUP2 LT ISZERO PUSH @done JUMPI\n" +
           cap + "PUSH20 " + kAddrMask + " DUP2 PUSH1 0x10 ADD SLOAD AND PUSH8 " + kOneEther + "\n" + pay +
           "PUSH1 1 ADD PUSH @head JUMP\n"
           "done: JUMPDEST POP STOP\n";
}

inline std::string length_cap(int limit) {
    return "PUSH1 " + std::to_string(limit) + " PUSH1 0 SLOAD GT ISZERO PUSH @capok JUMPI PUSH1 0 DUP1 REVERT\n"
           "capok: JUMPDEST\n";
}

inline std::string send_or_break() { return kSend + "ISZERO PUSH @done JUMPI\n"; }

inline Fixture duei() {
    return {"duei", prelude() + dispatch({{"refundAll()", "f"}}) + reverting_fallback() + nonpayable("f") +
                        member_loop(length_cap(100), transfer("paid")),
            {DefectKind::DuEI}};
}

inline Fixture duei_fixed() {
    return {"duei_fixed", prelude() + dispatch({{"refundAll()", "f"}}) + reverting_fallback() + nonpayable("f") +
                              member_loop(length_cap(100), send_or_break()),
            {}};
}

inline Fixture sbe() {
    return {"sbe", prelude() + dispatch({{"claim()", "f"}}) + reverting_fallback() + nonpayable("f") + "PUSH8 " +
                       kOneEther + " ADDRESS BALANCE EQ ISZERO PUSH @skip JUMPI\n"
                       "CALLER ADDRESS BALANCE\n" + transfer("paid") + "skip: JUMPDEST STOP\n",
            {DefectKind::SBE}};
}

inline Fixture sbe_fixed() {
    return {"sbe_fixed", prelude() + dispatch({{"claim()", "f"}}) + reverting_fallback() + nonpayable("f") + "PUSH8 " +
                             kOneEther + " ADDRESS BALANCE LT PUSH @skip JUMPI\n"
                             "CALLER ADDRESS BALANCE\n" + transfer("paid") + "skip: JUMPDEST STOP\n",
            {}};
}

// [] -> [slot of balances[msg.sender]]
inline const std::string kSenderBalanceSlot = "CALLER PUSH1 0 MSTORE PUSH1 0 PUSH1 0x20 MSTORE PUSH1 0x40 PUSH1 0 SHA3\n";

inline Fixture re() {
    return {"re", prelude() + dispatch({{"withdraw()", "f"}}) + reverting_fallback() + nonpayable("f") +
                      kSenderBalanceSlot + "PUSH1 0 DUP2 SLOAD GT ISZERO PUSH @end JUMPI\n"
                      "CALLER DUP2 SLOAD\n" + kCallValue + require_ok("sent") + "PUSH1 0 DUP2 SSTORE\n"
                      "end: JUMPDEST POP STOP\n",
            {DefectKind::RE}};
}

inline Fixture re_fixed() {
    return {"re_fixed", prelude() + dispatch({{"withdraw()", "f"}}) + reverting_fallback() + nonpayable("f") +
                            kSenderBalanceSlot + "PUSH1 0 DUP2 SLOAD GT ISZERO PUSH @end JUMPI\n"
                            "CALLER DUP2 SLOAD PUSH1 0 DUP4 SSTORE\n" + kCallValue + require_ok("sent") +
                            "end: JUMPDEST POP STOP\n",
            {}};
}

inline Fixture nc() {
    return {"nc", prelude() + dispatch({{"payAll()", "f"}}) + reverting_fallback() + nonpayable("f") +
                      member_loop("", send_or_break()),
            {DefectKind::NC}};
}

inline Fixture nc_fixed() {
    return {"nc_fixed", prelude() + dispatch({{"payAll()", "f"}}) + reverting_fallback() + nonpayable("f") +
                            member_loop(length_cap(50), send_or_break()),
            {}};
}

inline std::string gc_common() {
    return "fallback: JUMPDEST CALLVALUE PUSH1 0 SLOAD ADD PUSH1 0 SSTORE STOP\n" + nonpayable("total") +
           "PUSH1 0 SLOAD PUSH1 0 MSTORE PUSH1 0x20 PUSH1 0 RETURN\n";
}

inline Fixture gc() {
    return {"gc", prelude() + dispatch({{"total()", "total"}}) + gc_common(), {DefectKind::GC}};
}

inline Fixture gc_fixed() {
    return {"gc_fixed", prelude() + dispatch({{"total()", "total"}, {"withdraw()", "w"}}) + gc_common() +
                            nonpayable("w") + "PUSH1 1 SLOAD PUSH20 " + kAddrMask +
                            " AND CALLER EQ PUSH @auth JUMPI PUSH1 0 DUP1 REVERT\n"
                            "auth: JUMPDEST CALLER ADDRESS BALANCE\n" + transfer("paid") + "STOP\n",
            {}};
}

inline Fixture uec() {
    return {"uec", prelude() + dispatch({{"pay(uint256)", "f"}}) + reverting_fallback() + nonpayable("f") +
                       "CALLER PUSH1 4 CALLDATALOAD\n" + kSend + "POP STOP\n",
            {DefectKind::UEC}};
}

inline Fixture uec_fixed() {
    return {"uec_fixed", prelude() + dispatch({{"pay(uint256)", "f"}}) + reverting_fallback() + nonpayable("f") +
                             "CALLER PUSH1 4 CALLDATALOAD\n" + transfer("paid") + "STOP\n",
            {}};
}

inline Fixture bid() {
    return {"bid", prelude() + dispatch({{"guess(uint256)", "f"}}) + reverting_fallback() + nonpayable("f") +
                       "PUSH1 10 PUSH1 1 NUMBER SUB BLOCKHASH MOD\n"
                       "PUSH1 4 CALLDATALOAD EQ ISZERO PUSH @lose JUMPI\n"
                       "CALLER PUSH8 0x016345785d8a0000\n" + transfer("paid") + "lose: JUMPDEST STOP\n",
            {DefectKind::BID}};
}

inline Fixture bid_fixed() {
    return {"bid_fixed", prelude() + dispatch({{"guess(uint256)", "f"}}) + reverting_fallback() + nonpayable("f") +
                             "PUSH1 0x24 CALLDATALOAD PUSH1 0 MSTORE PUSH1 10 PUSH1 0x20 PUSH1 0 SHA3 MOD\n"
                             "PUSH1 4 CALLDATALOAD EQ ISZERO PUSH @lose JUMPI\n"
                             "CALLER PUSH8 0x016345785d8a0000\n" + transfer("paid") + "lose: JUMPDEST STOP\n",
            {}};
}

inline std::vector<std::pair<Fixture, Fixture>> paired() {
    return {{tsd(), tsd_fixed()}, {duei(), duei_fixed()}, {sbe(), sbe_fixed()}, {re(), re_fixed()},
            {nc(), nc_fixed()},   {gc(), gc_fixed()},     {uec(), uec_fixed()}, {bid(), bid_fixed()}};
}

// ---------------------------------------------------------------------------
// Regression pins

/// The CFG walk-through contract: `if (num > 10) a = 1 else a = 0`, with
/// the comparison block at offset 130.
inline Fixture branch_demo() {
    return {"branch_demo",
            "PUSH1 4 CALLDATALOAD\n"
            "PUSH32 0 POP PUSH32 0 POP PUSH32 0 POP PUSH23 0 POP\n"
            "b1: JUMPDEST PUSH1 0 PUSH1 0x0a DUP3 GT ISZERO PUSH1 @b2 JUMPI\n"
            "PUSH1 1 SWAP1 POP PUSH1 @b4 JUMP\n"
            "b2: JUMPDEST PUSH1 0 SWAP1 POP\n"
            "b4: JUMPDEST PUSH1 0 MSTORE STOP\n",
            {}};
}

/// sendReward(): loop over investors.length paying each with transfer().
inline Fixture reward_loop() {
    const std::string investors_base = "0xb10e2d527612073b26eecdfd717e6a320cf44b4afac2b0732d9fcbe2b7fa0cf6";  // keccak(1)
    return {"reward_loop",
            prelude() + dispatch({{"sendReward()", "f"}}) + reverting_fallback() + nonpayable("f") +
                // isOwner
                "PUSH1 0 SLOAD PUSH20 " + kAddrMask + " AND CALLER EQ PUSH @owner JUMPI PUSH1 0 DUP1 REVERT\n"
                "owner: JUMPDEST PUSH1 0\n"
                "head: JUMPDEST PUSH1 1 SLOAD DUP2 LT ISZERO PUSH @done JUMPI\n"
                // address _add = investors[i]  (bounds check, then load)
                "PUSH1 1 SLOAD DUP2 LT PUSH @inb JUMPI INVALID\n"
                "inb: JUMPDEST PUSH20 " + kAddrMask + " DUP2 PUSH32 " + investors_base + " ADD SLOAD AND\n"
                // User memory _user = addressToUser[_add]
                "DUP1 PUSH1 0 MSTORE PUSH1 2 PUSH1 0x20 MSTORE PUSH1 0x40 PUSH1 0 SHA3\n"
                "DUP1 SLOAD PUSH1 0xff AND ISZERO PUSH @alive JUMPI\n"
                // gameOver: reset rebirth
                "PUSH2 0x0e10 TIMESTAMP SUB DUP2 PUSH1 1 ADD SSTORE PUSH @next JUMP\n"
                "alive: JUMPDEST PUSH2 0x1c20 DUP2 PUSH1 1 ADD SLOAD TIMESTAMP SUB LT PUSH @next JUMPI\n"
                // staticAmount = getStatic(_add)
                "DUP2 PUSH1 0 MSTORE PUSH1 3 PUSH1 0x20 MSTORE PUSH1 0x40 PUSH1 0 SHA3 SLOAD\n"
                "DUP1 ISZERO PUSH @nopay JUMPI\n"
                "DUP3 DUP2\n" + transfer("paid") +
                "nopay: JUMPDEST POP\n"
                "next: JUMPDEST POP POP PUSH1 1 ADD PUSH @head JUMP\n"
                "done: JUMPDEST POP STOP\n",
            {DefectKind::NC, DefectKind::DuEI}};
}

/// Bank with Deposit() and CashOut(uint256): sends before updating the balance.
inline Fixture bank() {
    // TransferLog.AddMessage(msg.sender, amount, "..."), a zero-value call whose result is checked.
    auto log_call = [](const std::string& tag) {
        return "PUSH1 1 SLOAD PUSH20 " + kAddrMask + " AND DUP1 EXTCODESIZE ISZERO ISZERO PUSH @" + tag +
               "_code JUMPI PUSH1 0 DUP1 REVERT\n" + tag +
               "_code: JUMPDEST PUSH1 0 PUSH1 0 PUSH1 0x64 PUSH1 0x80 PUSH1 0 DUP6 GAS CALL ISZERO ISZERO PUSH @" + tag +
               "_ok JUMPI PUSH1 0 DUP1 REVERT\n" + tag + "_ok: JUMPDEST POP\n";
    };
    return {"bank",
            prelude() + dispatch({{"Deposit()", "dep"}, {"CashOut(uint256)", "cash"}}) + reverting_fallback() +
                // Deposit() payable: if (msg.value >= MinDeposit) { balances[msg.sender] += msg.value; log }
                "dep: JUMPDEST POP PUSH1 2 SLOAD CALLVALUE LT PUSH @dep_end JUMPI\n" + kSenderBalanceSlot +
                "DUP1 SLOAD CALLVALUE ADD SWAP1 SSTORE\n" + log_call("dl") +
                "dep_end: JUMPDEST STOP\n" + nonpayable("cash") +
                // if (_am <= balances[msg.sender])
                "PUSH1 4 CALLDATALOAD " + kSenderBalanceSlot +
                "DUP1 SLOAD DUP3 GT PUSH @cash_end JUMPI\n"
                // if (msg.sender.call.value(_am)())
                "CALLER DUP3\n" + kCallValue + "ISZERO PUSH @cash_end JUMPI\n"
                // balances[msg.sender] -= _am; log
                "DUP2 DUP2 SLOAD SUB DUP2 SSTORE\n" + log_call("cl") +
                "cash_end: JUMPDEST POP POP STOP\n",
            {DefectKind::RE}};
}

/// SafeMath.sub called twice from a payable fallback; the shared body looks like a loop.
inline Fixture shared_sub() {
    return {"shared_sub",
            prelude() +
                "PUSH @r1 PUSH1 0 SLOAD PUSH1 100 PUSH @sub JUMP\n"
                "sub: JUMPDEST DUP2 DUP2 GT ISZERO PUSH @sub_ok JUMPI INVALID\n"
                "sub_ok: JUMPDEST SWAP1 SUB SWAP1 JUMP\n"
                "r1: JUMPDEST CALLER DUP2\n" + transfer("paid") +
                "PUSH @r2 CALLVALUE DUP3 PUSH @sub JUMP\n"
                "r2: JUMPDEST POP POP STOP\n",
            {DefectKind::DuEI, DefectKind::NC}};
}

/// getBalance() copies this.balance into storage; DefectFunction() compares the copy.
inline Fixture cross_fn_balance() {
    return {"cross_fn_balance",
            prelude() + dispatch({{"getBalance()", "gb"}, {"DefectFunction()", "df"}}) + reverting_fallback() +
                nonpayable("gb") + "ADDRESS BALANCE PUSH1 0 SSTORE STOP\n" + nonpayable("df") + "PUSH8 " + kOneEther +
                " PUSH1 0 SLOAD EQ ISZERO PUSH @df_end JUMPI\n"
                "PUSH1 1 PUSH1 1 SSTORE\n"
                "df_end: JUMPDEST STOP\n",
            {}};
}

/// Every fixture above, paired ones first.
inline std::vector<Fixture> pins() { return {branch_demo(), shared_sub(), cross_fn_balance(), reward_loop(), bank()}; }

inline std::vector<Fixture> corpus() {
    std::vector<Fixture> out;
    for (auto& [bad, good] : paired()) {
        out.push_back(bad);
        out.push_back(good);
    }
    for (auto& f : pins()) out.push_back(f);
    return out;
}

}  // namespace fixtures
