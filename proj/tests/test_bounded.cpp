#include "spec_gen.hpp"
#include "support.hpp"

#include <cise/bounded.hpp>

#include <gtest/gtest.h>

using namespace cise;
using cise::test::bank;
using cise::test::load_shared;

namespace {

ConcreteState balances(IntArray b) { return ConcreteState{{Value{std::move(b)}}}; }

// Program-order position of an assertion failure, as the checker's
// weakest-precondition reading defines it: a failing assertion hides later ones.
int first_failure(const Obligation& ob, const Execution& ex) {
    const int n = static_cast<int>(ob.calls.size());
    for (int c = 0; c <= n; ++c) {
        for (int a = 0; a < static_cast<int>(ob.assertions.size()); ++a) {
            const auto& as = ob.assertions[static_cast<std::size_t>(a)];
            if (as.role == AssertionRole::memory_safety) continue;
            const bool here = c < n ? as.before_call == c : as.before_call < 0;
            if (here && ex.assertions[static_cast<std::size_t>(a)] != Truth::yes) return a;
        }
        if (ex.fault && ex.fault_call == c) return ob.memory_safety_index();
    }
    return -1;
}

// Unpruned reference enumeration in the documented order.
std::vector<std::optional<Valuation>> naive_first_failures(const Obligation& ob, const Bounds& b) {
    const auto states = satisfying_states(ob.spec->ast.state, b, nullptr, 1u << 20);
    std::vector<std::optional<Valuation>> first(ob.assertions.size());
    const std::size_t ns = ob.states.size();
    const std::size_t nx = ob.scalars.size();
    std::vector<std::size_t> si(ns, 0);
    for (;;) {
        Valuation v;
        for (auto i : si) v.states.push_back(states[i]);
        std::vector<Int> xs(nx);
        for (std::size_t k = 0; k < nx; ++k) xs[k] = ob.scalars[k].type == Type::boolean ? 0 : b.lo;
        for (;;) {
            v.scalars = xs;
            const Execution ex = execute(ob, v);
            if (ex.assumptions == Truth::yes) {
                const int a = first_failure(ob, ex);
                if (a >= 0 && !first[static_cast<std::size_t>(a)]) first[static_cast<std::size_t>(a)] = v;
            }
            bool carried = true;
            for (std::size_t k = nx; k-- > 0;) {
                const bool is_bool = ob.scalars[k].type == Type::boolean;
                if (xs[k] < (is_bool ? 1 : b.hi)) {
                    ++xs[k];
                    carried = false;
                    break;
                }
                xs[k] = is_bool ? 0 : b.lo;
            }
            if (carried) break;
        }
        std::size_t k = ns;
        bool done = true;
        while (k > 0) {
            --k;
            if (si[k] + 1 < states.size()) {
                ++si[k];
                done = false;
                break;
            }
            si[k] = 0;
        }
        if (done) break;
    }
    return first;
}

}  // namespace

TEST(Check, WithdrawSelfConflictWitness) {
    const auto spec = bank();
    const Obligation ob = gen_self(spec, 1);
    const Verdict v = check(ob, Bounds{});
    ASSERT_EQ(v.status, VerdictStatus::counterexample);
    const Witness& w = *v.witness;
    EXPECT_EQ(w.valuation.scalars, (std::vector<Int>{0, 1}));  // accountId, amount
    EXPECT_EQ(w.valuation.states, (std::vector<ConcreteState>{balances({1})}));
    EXPECT_EQ(ob.assertions[static_cast<std::size_t>(w.assertion)].role, AssertionRole::precondition);
    EXPECT_EQ(describe(w.valuation, ob), "accountId = 0, amount = 1, state = {balance = [1]}");
}

TEST(Check, BankValidObligations) {
    const auto spec = bank();
    for (const Obligation& ob : {gen_self(spec, 0), gen_pair(spec, 0, 1), gen_safety(spec, 0), gen_safety(spec, 1)}) {
        const Verdict v = check(ob, Bounds{});
        EXPECT_EQ(v.status, VerdictStatus::valid_within_bounds) << ob.id;
        EXPECT_GT(v.stats.models, 0u) << ob.id;
    }
}

TEST(Check, MutantDepositBreaksInvariant) {
    const auto spec = load_shared(test::mutant_bank_source());
    const Obligation ob = gen_safety(spec, 0);
    const Verdict v = check(ob, Bounds{});
    ASSERT_EQ(v.status, VerdictStatus::counterexample);
    EXPECT_EQ(v.witness->valuation.scalars, (std::vector<Int>{0, -1}));
    EXPECT_EQ(v.witness->valuation.states, (std::vector<ConcreteState>{balances({0})}));
    EXPECT_EQ(ob.assertions[static_cast<std::size_t>(v.witness->assertion)].role, AssertionRole::invariant);
    const Trace t = replay(v, ob);
    EXPECT_TRUE(t.reproduced);
    EXPECT_EQ(t.events.back().kind, TraceEvent::Kind::check);
    EXPECT_FALSE(t.events.back().ok);
}

TEST(Check, SkipOperationIsSafe) {
    const auto spec = load_shared("type st [@state] = { x : int } invariant { x >= 0 }\n"
                                  "let nop (s : st) ensures { true } = skip\n");
    EXPECT_EQ(check(gen_safety(spec, 0), Bounds{}).status, VerdictStatus::valid_within_bounds);
    EXPECT_EQ(check(gen_self(spec, 0), Bounds{}).status, VerdictStatus::valid_within_bounds);
}

TEST(Check, MemorySafetyFault) {
    const auto spec = load_shared("type st [@state] = { a : array int }\n"
                                  "let poke (i : int) (s : st) = s.a[i] <- 1\n");
    const Obligation ob = gen_safety(spec, 0);
    const Verdict v = check(ob, Bounds{});
    ASSERT_EQ(v.status, VerdictStatus::counterexample);
    EXPECT_EQ(v.witness->assertion, ob.memory_safety_index());
    EXPECT_EQ(v.witness->fault.kind, FaultKind::index_out_of_bounds);
    EXPECT_EQ(v.witness->valuation.scalars, (std::vector<Int>{-4}));
    EXPECT_TRUE(replay(v, ob).reproduced);
}

TEST(Check, ResourceCapIsReported) {
    const auto spec = bank();
    Bounds b;
    b.max_nodes = 50;
    const Verdict v = check(gen_pair(spec, 0, 1), b);
    EXPECT_EQ(v.status, VerdictStatus::resource_exhausted);
    EXPECT_EQ(v.assertions[0].status, AssertionStatus::undetermined);
}

TEST(Check, InvalidBounds) {
    EXPECT_THROW(validate(Bounds{1, 4, 0, 3}), std::invalid_argument);
    EXPECT_THROW(validate(Bounds{-4, 4, 3, 1}), std::invalid_argument);
    EXPECT_NO_THROW(validate(Bounds{0, 0, 0, 0}));
}

TEST(Check, Deterministic) {
    const auto spec = bank();
    const Obligation ob = gen_self(spec, 1);
    const Verdict a = check(ob, Bounds{});
    const Verdict b = check(ob, Bounds{});
    EXPECT_EQ(a.witness->valuation, b.witness->valuation);
    EXPECT_EQ(a.stats.nodes, b.stats.nodes);
}

TEST(Check, MonotoneInBounds) {
    const auto spec = bank();
    const Obligation ob = gen_self(spec, 1);
    for (const Bounds& b : {Bounds{-1, 1, 0, 1}, Bounds{-4, 4, 0, 3}, Bounds{-6, 6, 0, 4}, Bounds{-2, 9, 1, 2}}) {
        EXPECT_EQ(check(ob, b).status, VerdictStatus::counterexample);
    }
    EXPECT_EQ(check(ob, Bounds{0, 0, 0, 3}).status, VerdictStatus::valid_within_bounds);  // no positive amount
}

TEST(Replay, WithdrawTrace) {
    const auto spec = bank();
    const Obligation ob = gen_self(spec, 1);
    const Trace t = replay(check(ob, Bounds{}), ob);
    EXPECT_TRUE(t.reproduced);
    ASSERT_EQ(t.events.size(), 3u);
    EXPECT_EQ(t.events[0].states[0], balances({1}));
    EXPECT_EQ(t.events[1].kind, TraceEvent::Kind::call);
    EXPECT_EQ(t.events[1].states[0], balances({0}));
    EXPECT_EQ(t.events[2].kind, TraceEvent::Kind::check);
    EXPECT_FALSE(t.events[2].ok);
    EXPECT_NE(format_trace(t).find("FAILS: precondition of withdraw (call 2)"), std::string::npos) << format_trace(t);
}

TEST(Replay, RefusedWithoutWitness) {
    const auto spec = bank();
    const Obligation ob = gen_self(spec, 0);
    EXPECT_THROW(replay(check(ob, Bounds{}), ob), NoWitness);
}

TEST(Replay, StaleWitness) {
    const auto spec = bank();
    const Obligation ob = gen_self(spec, 1);
    const Verdict v = check(ob, Bounds{});
    const auto changed = load_shared(test::spec_source("bank.cise") + "\n// edit\nconflict deposit deposit\n");
    const Obligation other = gen_self(changed, 1);
    EXPECT_THROW(replay(*v.witness, other), StaleWitness);
}

TEST(SatisfyingStates, BankInvariant) {
    const auto spec = bank();
    const auto states = satisfying_states(spec->ast.state, Bounds{}, &*spec->ast.state.invariant, 100000);
    EXPECT_EQ(states.size(), 1u + 5 + 25 + 125);
    EXPECT_EQ(states[0], balances({}));
    EXPECT_EQ(states[1], balances({0}));
    EXPECT_EQ(satisfying_states(spec->ast.state, Bounds{}, nullptr, 7).size(), 7u);
}

// Pruned search agrees with brute force on every assertion's first failing
// valuation, and every counterexample replays through the interpreter.
TEST(Property, PruningMatchesBruteForceAndWitnessesReplay) {
    const Bounds b{-1, 1, 0, 1};
    int counterexamples = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        gen::SpecGen generator(seed, gen::GenOptions{1, 2, 2, true, false});
        const auto spec = std::make_shared<const TypedSpec>(typecheck(generator.spec()));
        for (const Obligation& ob : gen_all(spec).obligations) {
            if (ob.scalars.size() + 2 * ob.states.size() > 8) continue;  // keep brute force cheap
            const Verdict v = check(ob, b);
            ASSERT_NE(v.status, VerdictStatus::resource_exhausted);
            const auto naive = naive_first_failures(ob, b);
            for (std::size_t a = 0; a < ob.assertions.size(); ++a) {
                const auto& got = v.assertions[a];
                EXPECT_EQ(got.status == AssertionStatus::fails, naive[a].has_value()) << seed << ' ' << ob.id << ' ' << a;
                if (got.witness && naive[a]) EXPECT_EQ(got.witness->valuation, *naive[a]) << seed << ' ' << ob.id;
                if (got.witness) {
                    ++counterexamples;
                    const Trace t = replay(*got.witness, ob);
                    EXPECT_TRUE(t.reproduced) << seed << ' ' << ob.id << '\n' << format_trace(t);
                }
            }
        }
    }
    EXPECT_GT(counterexamples, 20);
}
