/// @file vcgen.hpp
/// @brief Safety, pair (commutativity + stability) and self-stability obligations.
///
/// Expressions inside an Obligation are re-resolved into the obligation's own
/// namespace: RefKind::param indexes `scalars`, RefKind::state_var indexes
/// `states`. Symbol names are rewritten too, so printing reads like the
/// generated ghost functions.

#pragma once

#include <cise/frontend.hpp>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cise {

enum class ObligationKind { safety, pair, self };

std::string_view to_string(ObligationKind k);

enum class AssertionRole { precondition, postcondition, invariant, state_equality, trivial, memory_safety };

std::string_view to_string(AssertionRole r);

struct Symbol {
    std::string name;
    Type type = Type::integer;
};

struct Call {
    int op = -1;
    std::vector<int> args;  ///< per operation parameter: scalar symbol, or -1 at the state parameter
    int state = 0;          ///< state symbol the call runs on
    Expr precondition;      ///< the op's requires, instantiated for this call
};

struct Assertion {
    AssertionRole role = AssertionRole::trivial;
    int before_call = -1;  ///< checked just before this call; -1 = after the last call
    std::string label;
    Expr formula;          ///< `old` reads the initial states
};

struct Obligation {
    std::string id;
    ObligationKind kind = ObligationKind::safety;
    std::vector<std::string> ops;  ///< operations under analysis (1 or 2 names)
    std::vector<Symbol> scalars;
    std::vector<std::string> states;
    std::vector<Expr> assumptions;  ///< conjuncts of the assume block
    std::vector<Call> calls;
    /// In checking order. The last entry is always the synthetic
    /// memory-safety assertion (formula `true`), which fails when a body faults.
    std::vector<Assertion> assertions;
    std::string spec_hash;
    std::shared_ptr<const TypedSpec> spec;

    [[nodiscard]] int memory_safety_index() const { return static_cast<int>(assertions.size()) - 1; }
};

/// Formula over state slots 0 and 1.
struct EqualityPredicate {
    std::string name;
    Expr body;
    bool user_defined = false;
};

/// Field-wise: `=` on scalars, equal length and equal cells on arrays.
EqualityPredicate default_state_equality(const StateDecl& decl);
/// The `[@state_eq]` predicate if there is one, else the default.
EqualityPredicate state_equality(const TypedSpec& spec);

struct VcOptions {
    bool assume_invariant = true;  ///< conjoin I on the initial states of pair/self obligations
};

/// Raised for pairs the author declared as conflicting.
class PairSkipped : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool declared_conflict(const SpecAst& spec, const std::string& f, const std::string& g);

Obligation gen_safety(const std::shared_ptr<const TypedSpec>& spec, int op, const VcOptions& opt = {});
/// Requires f != g; throws std::invalid_argument otherwise, PairSkipped if declared.
Obligation gen_pair(const std::shared_ptr<const TypedSpec>& spec, int f, int g, const VcOptions& opt = {});
Obligation gen_self(const std::shared_ptr<const TypedSpec>& spec, int f, const VcOptions& opt = {});

struct SkippedPair {
    std::string first;
    std::string second;
};

struct ObligationSet {
    std::vector<Obligation> obligations;  ///< safety, then self, then pairs, each in declaration order
    std::vector<SkippedPair> skipped;
};

ObligationSet gen_all(const std::shared_ptr<const TypedSpec>& spec, const VcOptions& opt = {});

/// Human-readable listing in the style of a generated ghost function.
std::string print_obligation(const Obligation& ob);

}  // namespace cise
