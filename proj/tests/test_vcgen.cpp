#include "spec_gen.hpp"
#include "support.hpp"

#include <cise/bounded.hpp>
#include <cise/vcgen.hpp>

#include <gtest/gtest.h>

using namespace cise;
using cise::test::bank;
using cise::test::load_shared;

namespace {

std::vector<std::string> call_listing(const Obligation& ob) {
    std::vector<std::string> out;
    for (const auto& c : ob.calls) {
        const auto& op = ob.spec->op(c.op);
        std::string s = op.name;
        for (std::size_t p = 0; p < op.params.size(); ++p) {
            s += ' ';
            s += c.args[p] < 0 ? ob.states[static_cast<std::size_t>(c.state)]
                               : ob.scalars[static_cast<std::size_t>(c.args[p])].name;
        }
        out.push_back(s);
    }
    return out;
}

std::vector<AssertionRole> roles(const Obligation& ob) {
    std::vector<AssertionRole> out;
    for (const auto& a : ob.assertions) out.push_back(a.role);
    return out;
}

}  // namespace

TEST(DefaultEquality, ArrayField) {
    const auto spec = bank();
    const EqualityPredicate eq = default_state_equality(spec->ast.state);
    EXPECT_FALSE(eq.user_defined);
    EXPECT_EQ(print_expr(eq.body),
              "length s1.balance = length s2.balance /\\ (forall i in s1.balance. s1.balance[i] = s2.balance[i])");
}

TEST(DefaultEquality, IntField) {
    const auto spec = load_shared("type st [@state] = { x : int }");
    EXPECT_EQ(print_expr(default_state_equality(spec->ast.state).body), "s1.x = s2.x");
    EXPECT_EQ(print_expr(default_state_equality(load_shared("type st [@state] = {}")->ast.state).body), "true");
}

// The default predicate agrees with the bank's array_eq and is reflexive and
// symmetric; for a mixed record it is exactly structural equality.
TEST(DefaultEquality, AgreesWithStructuralEqualityOnBoundedDomain) {
    const auto mixed = load_shared("type st [@state] = { x : int; a : array int; b : bool }");
    const Bounds small{-1, 1, 0, 2};
    const auto states = satisfying_states(mixed->ast.state, small, nullptr, 100000);
    ASSERT_EQ(states.size(), 3u * (1 + 3 + 9) * 2);
    const EqualityPredicate eq = default_state_equality(mixed->ast.state);
    for (const auto& a : states) {
        for (const auto& b : states) {
            const ConcreteState* ab[2] = {&a, &b};
            const ConcreteState* ba[2] = {&b, &a};
            const Truth t = eval_truth(eq.body, Frame{{}, ab, ab, nullptr});
            EXPECT_EQ(t, a == b ? Truth::yes : Truth::no);
            EXPECT_EQ(eval_truth(eq.body, Frame{{}, ba, ba, nullptr}), t);
        }
    }
    const auto b = bank();
    const auto bank_states = satisfying_states(b->ast.state, Bounds{-2, 2, 0, 2}, nullptr, 100000);
    const EqualityPredicate user = state_equality(*b);
    const EqualityPredicate dflt = default_state_equality(b->ast.state);
    EXPECT_TRUE(user.user_defined);
    for (const auto& x : bank_states) {
        for (const auto& y : bank_states) {
            const ConcreteState* xy[2] = {&x, &y};
            const Frame f{{}, xy, xy, nullptr};
            EXPECT_EQ(eval_truth(user.body, f), eval_truth(dflt.body, f));
        }
    }
}

TEST(Safety, DepositShape) {
    const auto spec = bank();
    const Obligation ob = gen_safety(spec, 0);
    EXPECT_EQ(ob.id, "safety_deposit");
    EXPECT_EQ(ob.calls.size(), 1u);
    ASSERT_EQ(ob.assumptions.size(), 3u);
    EXPECT_EQ(print_expr(ob.assumptions[0]), "forall i in state.balance. state.balance[i] >= 0");
    EXPECT_EQ(print_expr(ob.assumptions[1]), "amount > 0");
    EXPECT_EQ(print_expr(ob.assumptions[2]), "accountId >= 0 /\\ accountId < length state.balance");
    EXPECT_EQ(roles(ob), (std::vector<AssertionRole>{AssertionRole::postcondition, AssertionRole::invariant,
                                                     AssertionRole::memory_safety}));
    EXPECT_EQ(ob.spec_hash, spec->fingerprint);
}

TEST(Pair, DepositWithdrawMirrorsListing) {
    const auto spec = bank();
    const Obligation ob = gen_pair(spec, 0, 1, VcOptions{false});
    EXPECT_EQ(ob.id, "pair_deposit_withdraw");
    std::vector<std::string> names;
    for (const auto& s : ob.scalars) names.push_back(s.name);
    EXPECT_EQ(names, (std::vector<std::string>{"accountId1", "amount1", "accountId2", "amount2"}));
    EXPECT_EQ(ob.states, (std::vector<std::string>{"state1", "state2"}));
    EXPECT_EQ(call_listing(ob), (std::vector<std::string>{"withdraw accountId2 amount2 state1",
                                                          "deposit accountId1 amount1 state1",
                                                          "deposit accountId1 amount1 state2",
                                                          "withdraw accountId2 amount2 state2"}));
    std::vector<std::string> assume;
    for (const auto& a : ob.assumptions) assume.push_back(print_expr(a));
    EXPECT_EQ(assume, (std::vector<std::string>{
                          "amount1 > 0",
                          "accountId1 >= 0 /\\ accountId1 < length state1.balance",
                          "amount2 > 0",
                          "state2.balance[accountId2] - amount2 >= 0",
                          "accountId2 >= 0 /\\ accountId2 < length state2.balance",
                          "array_eq state1.balance state2.balance",
                      }));
    ASSERT_EQ(ob.assertions.size(), 5u);
    EXPECT_EQ(ob.assertions[0].before_call, 1);
    EXPECT_EQ(ob.assertions[1].before_call, 2);
    EXPECT_EQ(ob.assertions[2].before_call, 3);
    EXPECT_EQ(ob.assertions[3].role, AssertionRole::state_equality);
    // the inline assertion is the requires with the call's arguments and state substituted
    EXPECT_EQ(print_expr(ob.assertions[2].formula),
              "amount2 > 0 /\\ state2.balance[accountId2] - amount2 >= 0 /\\ "
              "(accountId2 >= 0 /\\ accountId2 < length state2.balance)");
    EXPECT_EQ(gen_pair(spec, 0, 1).assumptions.size(), 8u);  // plus I on both states
}

TEST(Pair, RejectsSelfAndDeclared) {
    const auto spec = bank();
    EXPECT_THROW(gen_pair(spec, 1, 1), std::invalid_argument);
    const auto declared = load_shared(test::spec_source("bank.cise") + "conflict withdraw deposit\n");
    EXPECT_THROW(gen_pair(declared, 0, 1), PairSkipped);
}

TEST(Self, WithdrawShape) {
    const auto spec = bank();
    const Obligation ob = gen_self(spec, 1);
    EXPECT_EQ(ob.id, "self_withdraw");
    EXPECT_EQ(call_listing(ob), (std::vector<std::string>{"withdraw accountId amount state",
                                                          "withdraw accountId amount state"}));
    EXPECT_EQ(roles(ob), (std::vector<AssertionRole>{AssertionRole::precondition, AssertionRole::trivial,
                                                     AssertionRole::memory_safety}));
    EXPECT_EQ(ob.assertions[0].before_call, 1);
    EXPECT_EQ(gen_self(spec, 1, VcOptions{false}).assumptions.size(), 3u);
    const auto declared = load_shared(test::spec_source("bank.cise") + "conflict withdraw withdraw\n");
    EXPECT_THROW(gen_self(declared, 1), PairSkipped);
}

TEST(Naming, ClashingSuffixesAreUniquified) {
    const auto spec = load_shared("type st [@state] = { x : int }\n"
                                  "let f (a a1 : int) (s : st) = s.x <- a + a1\n"
                                  "let g (a : int) (s1 : st) = s1.x <- a\n");
    const Obligation ob = gen_pair(spec, 0, 1);
    std::vector<std::string> names;
    for (const auto& s : ob.scalars) names.push_back(s.name);
    EXPECT_EQ(names, (std::vector<std::string>{"a1", "a11", "a2"}));
    EXPECT_EQ(ob.states, (std::vector<std::string>{"s1", "s12"}));
}

TEST(GenAll, CountsFollowFormula) {
    const auto spec = bank();
    const ObligationSet all = gen_all(spec);
    ASSERT_EQ(all.obligations.size(), 5u);
    std::vector<std::string> ids;
    for (const auto& o : all.obligations) ids.push_back(o.id);
    EXPECT_EQ(ids, (std::vector<std::string>{"safety_deposit", "safety_withdraw", "self_deposit", "self_withdraw",
                                             "pair_deposit_withdraw"}));
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        gen::SpecGen generator(seed, gen::GenOptions{0, 6, 2});
        const auto s = std::make_shared<const TypedSpec>(typecheck(generator.spec()));
        const auto n = static_cast<std::size_t>(s->op_count());
        std::set<std::pair<std::string, std::string>> declared;
        for (const auto& c : s->ast.conflicts) declared.insert(std::minmax(c.first, c.second));
        const ObligationSet set = gen_all(s);
        EXPECT_EQ(set.obligations.size(), n + n + n * (n - 1) / 2 - declared.size()) << seed;
        EXPECT_EQ(set.skipped.size(), declared.size());
    }
}

TEST(Print, ObligationListing) {
    const auto spec = bank();
    const std::string text = print_obligation(gen_self(spec, 1, VcOptions{false}));
    EXPECT_NE(text.find("let ghost withdraw_stability ()"), std::string::npos) << text;
    EXPECT_NE(text.find("val ghost accountId : int in"), std::string::npos);
    EXPECT_NE(text.find("withdraw accountId amount state;\n  assert {"), std::string::npos) << text;
}

// Swapping which interleaving runs first must not change whether the pair
// conflicts.
TEST(Pair, VerdictIsOrderInsensitive) {
    auto swapped = [](Obligation ob) {
        // calls g;f on s1 / f;g on s2  ->  f;g on s1 / g;f on s2
        std::swap(ob.calls[0], ob.calls[1]);
        std::swap(ob.calls[2], ob.calls[3]);
        for (auto& a : ob.assertions) {
            if (a.role == AssertionRole::precondition) a.formula = ob.calls[static_cast<std::size_t>(a.before_call)].precondition;
        }
        return ob;
    };
    std::vector<std::shared_ptr<const TypedSpec>> specs{bank(), test::mutex()};
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        gen::SpecGen generator(seed, gen::GenOptions{2, 3, 2, true, false});
        SpecAst ast = generator.spec();
        ast.equality.reset();  // an arbitrary user relation need not be symmetric
        specs.push_back(std::make_shared<const TypedSpec>(typecheck(std::move(ast))));
    }
    const Bounds b{-2, 2, 0, 2};
    for (const auto& spec : specs) {
        for (int i = 0; i < spec->op_count(); ++i) {
            for (int j = i + 1; j < spec->op_count(); ++j) {
                const Obligation ob = gen_pair(spec, i, j);
                const Verdict v1 = check(ob, b);
                const Verdict v2 = check(swapped(ob), b);
                ASSERT_NE(v1.status, VerdictStatus::resource_exhausted);
                EXPECT_EQ(v1.status, v2.status) << print_spec(spec->ast) << ob.id;
            }
        }
    }
}
