/// @file smt.hpp
/// @brief SMT-LIB v2.6 encoding of obligations and solver discharge.
///
/// Arrays become an uninterpreted `Int -> Int` function plus a length
/// constant; every write defines a new version with `define-fun` (SSA).
/// Memory safety and 64-bit overflow are not modeled: reads outside an
/// array's length are unconstrained and integers are unbounded.

#pragma once

#include <cise/bounded.hpp>
#include <cise/vcgen.hpp>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cise {

struct Term;
using TermPtr = std::shared_ptr<const Term>;

enum class TermKind {
    int_const, bool_const,
    sym,      ///< declared or defined constant
    bound,    ///< quantified or define-fun parameter
    select,   ///< `(fn index)`; name = fn
    ite, not_, and_, or_, implies, eq,
    lt, le, gt, ge, add, sub, mul, neg,
    forall, exists,  ///< name = variable; args = {lo, hi, body} over the half-open range
};

struct Term {
    TermKind kind = TermKind::int_const;
    Int value = 0;
    std::string name;
    std::vector<TermPtr> args;
};

std::string to_smtlib(const Term& t);

struct SmtDecl {
    enum class Kind { scalar, field, array, length } kind = Kind::scalar;
    std::string name;
    Type sort = Type::integer;  ///< integer or boolean for constants
    int symbol = -1;            ///< scalar symbol, or state symbol for the others
    int field = -1;
};

struct SmtDef {
    std::string name;
    bool is_array = false;  ///< `(name ((x Int)) Int body)` rather than a constant
    std::string param;
    Type sort = Type::integer;
    TermPtr body;
};

struct SmtGoal {
    int assertion = -1;  ///< index into Obligation::assertions
    std::string label;
    TermPtr formula;
};

struct SmtDoc {
    std::string obligation_id;
    std::string logic;
    std::vector<SmtDecl> decls;
    std::vector<TermPtr> assumptions;  ///< length >= 0 facts first, then the assume block
    std::vector<SmtDef> defs;
    std::vector<SmtGoal> goals;        ///< one per assertion except memory safety
    std::string text;                  ///< the rendered document
};

class UnsupportedConstruct : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

SmtDoc emit(const Obligation& ob);

/// Truth of each assumption and goal for one valuation, computing defined
/// symbols from their bodies. Out-of-range reads of input arrays read 0.
struct SmtEvaluation {
    std::vector<bool> assumptions;
    std::vector<bool> goals;
};

SmtEvaluation evaluate(const SmtDoc& doc, const Obligation& ob, const Valuation& v);

enum class GoalStatus { proved, counter_model, unknown, timeout };

std::string_view to_string(GoalStatus s);

struct GoalResult {
    int assertion = -1;
    GoalStatus status = GoalStatus::unknown;
    std::string model;  ///< raw solver output for a counter-model
};

struct SolverVerdict {
    std::vector<GoalResult> goals;
    bool timed_out = false;
    double elapsed_ms = 0;
};

class SolverSpawnError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Runs `solver_cmd` (split on whitespace; a bare `z3` gets `-in`) with the
/// document on standard input. Goals still open at the deadline are Timeout.
SolverVerdict discharge(const SmtDoc& doc, const std::string& solver_cmd, double timeout_s);

}  // namespace cise
