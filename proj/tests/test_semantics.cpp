#include <cise/frontend.hpp>
#include <cise/semantics.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace cise;

namespace {

TypedSpec bank() {
    std::ifstream in(std::string(CISE_SPEC_DIR) + "/bank.cise");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_spec(ss.str());
}

ConcreteState balances(IntArray b) { return ConcreteState{{Value{std::move(b)}}}; }

// Typechecks `expr` as the single requires clause of an operation over the bank state.
TypedSpec with_clause(const std::string& expr, const std::string& where = "requires") {
    return load_spec("type state [@state] = { balance : array int }\n"
                     "let probe (accountId amount : int) (state : state)\n  " +
                     where + " { " + expr + " }\n= skip\n");
}

const Expr& clause(const TypedSpec& t) {
    const auto& op = t.op(0);
    return op.requires_clauses.empty() ? op.ensures_clauses[0] : op.requires_clauses[0];
}

}  // namespace

TEST(Eval, Arithmetic) {
    // `state.balance[0] + amount` as the left operand of a comparison
    const TypedSpec t = with_clause("state.balance[0] + amount = 0");
    const Expr& sum = clause(t).kids[0];
    const Env env = Env::for_op(t.op(0), {{"amount", Int{3}}});
    EXPECT_EQ(std::get<Int>(eval_expr(sum, env, balances({5}))), 8);
}

TEST(Eval, Length) {
    const TypedSpec t = with_clause("length state.balance = 0");
    const Env env = Env::for_op(t.op(0), {});
    EXPECT_EQ(std::get<Int>(eval_expr(clause(t).kids[0], env, balances({1, 2, 3}))), 3);
}

TEST(Eval, OldReadsPreState) {
    const TypedSpec t = with_clause("(old state.balance)[accountId] + amount = 0", "ensures");
    const ConcreteState pre = balances({5});
    const ConcreteState post = balances({-100});
    const Env env = Env::for_op(t.op(0), {{"accountId", Int{0}}, {"amount", Int{3}}}, &pre);
    EXPECT_EQ(std::get<Int>(eval_expr(clause(t).kids[0], env, post)), 8);
}

TEST(Eval, IndexOutOfBoundsCarriesIndex) {
    const TypedSpec t = with_clause("state.balance[accountId] = 0");
    const Env env = Env::for_op(t.op(0), {{"accountId", Int{4}}});
    try {
        eval_expr(clause(t).kids[0], env, balances({1, 2}));
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_EQ(e.kind(), FaultKind::index_out_of_bounds);
        EXPECT_EQ(e.index(), 4);
    }
}

TEST(Eval, OverflowIsAFault) {
    const TypedSpec t = with_clause("amount * amount > 0");
    const Env env = Env::for_op(t.op(0), {{"amount", Int{1} << 40}});
    try {
        holds(clause(t), env, balances({}));
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_EQ(e.kind(), FaultKind::overflow);
    }
}

TEST(Holds, BankInvariant) {
    const TypedSpec t = bank();
    const Expr& inv = *t.ast.state.invariant;
    const Env none;
    EXPECT_TRUE(holds(inv, none, balances({0, 7})));
    EXPECT_FALSE(holds(inv, none, balances({-1})));
    EXPECT_TRUE(holds(inv, none, balances({})));
}

TEST(Holds, WithdrawPrecondition) {
    const TypedSpec t = bank();
    const auto& w = t.op(1);
    const Expr pre = conjoin(w.requires_clauses);
    EXPECT_TRUE(holds(pre, Env::for_op(w, {{"accountId", Int{0}}, {"amount", Int{1}}}), balances({1})));
    EXPECT_FALSE(holds(pre, Env::for_op(w, {{"accountId", Int{0}}, {"amount", Int{2}}}), balances({1})));
    // the unguarded read faults but the bounds conjunct is false, so the whole is false
    EXPECT_FALSE(holds(pre, Env::for_op(w, {{"accountId", Int{3}}, {"amount", Int{1}}}), balances({1})));
}

TEST(Holds, GuardedReadOnEitherSide) {
    const TypedSpec a = with_clause("accountId < length state.balance -> state.balance[accountId] > 0");
    const TypedSpec b = with_clause("state.balance[accountId] > 0 \\/ accountId >= length state.balance");
    for (const TypedSpec* t : {&a, &b}) {
        const Env env = Env::for_op(t->op(0), {{"accountId", Int{5}}});
        EXPECT_TRUE(holds(clause(*t), env, balances({1})));
    }
    const TypedSpec c = with_clause("state.balance[accountId] > 0 \\/ accountId < 0");
    EXPECT_THROW(holds(clause(c), Env::for_op(c.op(0), {{"accountId", Int{5}}}), balances({1})), EvalError);
}

TEST(Holds, Quantifiers) {
    const TypedSpec t = with_clause("exists i in 0 .. length state.balance. state.balance[i] = amount");
    const auto& op = t.op(0);
    EXPECT_TRUE(holds(clause(t), Env::for_op(op, {{"amount", Int{7}}}), balances({1, 7})));
    EXPECT_FALSE(holds(clause(t), Env::for_op(op, {{"amount", Int{3}}}), balances({1, 7})));
    EXPECT_FALSE(holds(clause(t), Env::for_op(op, {{"amount", Int{3}}}), balances({})));
    const TypedSpec empty_range = with_clause("forall i in 3 .. 1. i < 0");
    EXPECT_TRUE(holds(clause(empty_range), Env::for_op(empty_range.op(0), {}), balances({})));
}

TEST(Exec, DepositAndWithdraw) {
    const TypedSpec t = bank();
    const ConcreteState s = balances({5});
    const ConcreteState after = exec_body(t.op(0), Env::for_op(t.op(0), {{"accountId", Int{0}}, {"amount", Int{3}}}), s);
    EXPECT_EQ(after, balances({8}));
    EXPECT_EQ(s, balances({5}));  // input untouched
    const ConcreteState w = exec_body(t.op(1), Env::for_op(t.op(1), {{"accountId", Int{0}}, {"amount", Int{1}}}),
                                      balances({1}));
    EXPECT_EQ(w, balances({0}));
}

TEST(Exec, DepositOutOfRangeFaults) {
    const TypedSpec t = bank();
    try {
        exec_body(t.op(0), Env::for_op(t.op(0), {{"accountId", Int{1}}, {"amount", Int{3}}}), balances({5}));
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_EQ(e.kind(), FaultKind::index_out_of_bounds);
        EXPECT_EQ(e.index(), 1);
    }
}

TEST(Exec, SequentialAssignmentsAndConditionals) {
    const TypedSpec t = load_spec("type lock [@state] = { held : bool; owner : int }\n"
                                  "let toggle (pid : int) (s : lock) =\n"
                                  "  if s.held then { s.held <- false; s.owner <- 0 } else { s.held <- true; s.owner <- pid };\n"
                                  "  s.owner <- s.owner * 2\n");
    const auto& op = t.op(0);
    const ConcreteState free{{Value{false}, Value{Int{0}}}};
    const ConcreteState taken = exec_body(op, Env::for_op(op, {{"pid", Int{3}}}), free);
    EXPECT_EQ(taken, (ConcreteState{{Value{true}, Value{Int{6}}}}));
    EXPECT_EQ(exec_body(op, Env::for_op(op, {{"pid", Int{3}}}), taken), free);
}

// Frame property from deposit's ensures, checked exhaustively on small states.
TEST(Exec, DepositFrameAndContract) {
    const TypedSpec t = bank();
    const auto& dep = t.op(0);
    const Expr post = conjoin(dep.ensures_clauses);
    const Expr pre = conjoin(dep.requires_clauses);
    const Expr& inv = *t.ast.state.invariant;
    int checked = 0;
    for (int len = 0; len <= 3; ++len) {
        IntArray cells(static_cast<std::size_t>(len), 0);
        const int total = len == 0 ? 1 : static_cast<int>(std::pow(5, len));
        for (int code = 0; code < total; ++code) {
            int c = code;
            for (auto& v : cells) {
                v = c % 5;
                c /= 5;
            }
            const ConcreteState s = balances(cells);
            for (Int k = -1; k <= 3; ++k) {
                for (Int a = -1; a <= 3; ++a) {
                    const Env env = Env::for_op(dep, {{"accountId", k}, {"amount", a}});
                    if (!holds(pre, env, s) || !holds(inv, Env{}, s)) continue;
                    const ConcreteState out = exec_body(dep, env, s);  // never faults here
                    const auto& before = std::get<IntArray>(s.fields[0]);
                    const auto& after = std::get<IntArray>(out.fields[0]);
                    for (std::size_t i = 0; i < before.size(); ++i) {
                        if (static_cast<Int>(i) != k) EXPECT_EQ(after[i], before[i]);
                    }
                    EXPECT_TRUE(holds(post, Env::for_op(dep, {{"accountId", k}, {"amount", a}}, &s), out));
                    ++checked;
                }
            }
        }
    }
    EXPECT_GT(checked, 100);
}

TEST(Exec, Deterministic) {
    const TypedSpec t = bank();
    const Env env = Env::for_op(t.op(1), {{"accountId", Int{1}}, {"amount", Int{2}}});
    EXPECT_EQ(exec_body(t.op(1), env, balances({4, 4})), exec_body(t.op(1), env, balances({4, 4})));
}

TEST(Partial, UnknownUntilAssigned) {
    const TypedSpec t = bank();
    const Expr& inv = *t.ast.state.invariant;
    const ConcreteState s = balances({3, -1, 0});
    const ConcreteState* states[1] = {&s};
    Knowledge k{0, -1};
    PartialView view{std::span<const Knowledge>(&k, 1), 0};
    Frame frame{{}, states, states, &view};
    EXPECT_EQ(eval_truth(inv, frame), Truth::unknown);
    k.cells = 1;
    EXPECT_EQ(eval_truth(inv, frame), Truth::unknown);
    k.cells = 2;
    EXPECT_EQ(eval_truth(inv, frame), Truth::no);  // decided by the second cell
    view.states = {};
    EXPECT_EQ(eval_truth(inv, Frame{{}, states, states, nullptr}), Truth::no);
}
