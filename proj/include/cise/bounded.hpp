/// @file bounded.hpp
/// @brief Exhaustive small-scope discharge of obligations.
///
/// Enumeration order: every state symbol first (fields in declaration order;
/// ints ascending, bools false then true, arrays by length ascending then
/// cells lexicographically), then scalar symbols in declaration order, each
/// ascending. Assumptions are evaluated on partial valuations so a branch is
/// cut as soon as one conjunct is decided false.

#pragma once

#include <cise/semantics.hpp>
#include <cise/vcgen.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cise {

struct Bounds {
    Int lo = -4;
    Int hi = 4;
    int min_len = 0;
    int max_len = 3;
    std::uint64_t max_nodes = 10'000'000;  ///< partial valuations visited before giving up
};

/// Throws std::invalid_argument unless lo <= 0 <= hi and 0 <= min_len <= max_len.
void validate(const Bounds& b);

struct Valuation {
    std::vector<Int> scalars;  ///< by obligation scalar symbol; bools are 0/1
    std::vector<ConcreteState> states;

    friend bool operator==(const Valuation&, const Valuation&) = default;
};

std::string describe(const Valuation& v, const Obligation& ob);

struct Witness {
    Valuation valuation;
    int assertion = -1;  ///< index into Obligation::assertions
    Fault fault;         ///< set when the memory-safety assertion failed
    int fault_call = -1;
    std::string spec_hash;
};

enum class VerdictStatus { valid_within_bounds, counterexample, resource_exhausted };

std::string_view to_string(VerdictStatus s);

enum class AssertionStatus { holds_within_bounds, fails, undetermined };

std::string_view to_string(AssertionStatus s);

struct AssertionVerdict {
    AssertionStatus status = AssertionStatus::holds_within_bounds;
    std::optional<Witness> witness;  ///< first failing valuation for this assertion
};

struct CheckStats {
    std::uint64_t nodes = 0;
    std::uint64_t models = 0;  ///< complete valuations satisfying the assumptions
    double elapsed_ms = 0;
};

struct Verdict {
    VerdictStatus status = VerdictStatus::valid_within_bounds;
    std::optional<Witness> witness;  ///< earliest failure in enumeration order
    std::vector<AssertionVerdict> assertions;
    CheckStats stats;
    Bounds bounds;
};

/// Enumerates until every assertion has failed once or the space is exhausted.
Verdict check(const Obligation& ob, const Bounds& b);

/// Runs the calls on one valuation without stopping at failures and reports
/// the truth of every assertion at its program point. After a body fault,
/// later assertions are `fault`.
struct Execution {
    Truth assumptions = Truth::yes;
    std::vector<Truth> assertions;
    Fault fault;
    int fault_call = -1;
    std::vector<ConcreteState> final_states;
};

Execution execute(const Obligation& ob, const Valuation& v);

class StaleWitness : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoWitness : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TraceEvent {
    enum class Kind { start, call, check, fault } kind = Kind::start;
    int index = -1;  ///< call index or assertion index
    bool ok = true;
    std::string text;
    std::vector<ConcreteState> states;  ///< snapshot after the event
};

struct Trace {
    std::vector<TraceEvent> events;
    int failed_assertion = -1;
    bool reproduced = false;  ///< the first failure is the one the witness recorded
};

/// Re-executes a witness step by step. Assertions are recomputed from the
/// specification's own clauses via the public interpreter, independently of
/// the instantiated formulas the checker used.
Trace replay(const Witness& w, const Obligation& ob);
/// Throws NoWitness unless the verdict is a counterexample.
Trace replay(const Verdict& v, const Obligation& ob);

std::string format_trace(const Trace& t);

/// States within bounds satisfying `filter` (all states when null), in
/// enumeration order, stopping after `limit`.
std::vector<ConcreteState> satisfying_states(const StateDecl& decl, const Bounds& b, const Expr* filter,
                                             std::size_t limit);

}  // namespace cise
