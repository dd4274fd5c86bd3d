/// @file semantics.hpp
/// @brief Concrete interpreter for typed expressions and operation bodies.
///
/// Integers are 64-bit; any arithmetic result outside that range is a fault,
/// never a wraparound. Formulas are evaluated with a four-valued logic so that
/// a guard can protect an out-of-range read on either side of a conjunction:
/// `false /\ fault` is false and `true \/ fault` is true.

#pragma once

#include <cise/ast.hpp>

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cise {

using IntArray = std::vector<Int>;
using Value = std::variant<Int, bool, IntArray>;

std::string to_string(const Value& v);

struct ConcreteState {
    std::vector<Value> fields;  ///< in declaration order

    friend bool operator==(const ConcreteState&, const ConcreteState&) = default;
};

/// All-zero state: ints 0, bools false, arrays empty.
ConcreteState zero_state(const StateDecl& decl);

/// `{balance = [1, 2]; held = true}`
std::string to_string(const ConcreteState& s, const StateDecl& decl);

enum class FaultKind : std::uint8_t { none, index_out_of_bounds, overflow, range_too_large };

std::string_view to_string(FaultKind k);

struct Fault {
    FaultKind kind = FaultKind::none;
    Int index = 0;  ///< offending index for index_out_of_bounds
    Int length = 0;
    Span span;

    explicit operator bool() const { return kind != FaultKind::none; }
};

class EvalError : public std::runtime_error {
public:
    explicit EvalError(Fault f);
    [[nodiscard]] const Fault& fault() const noexcept { return fault_; }
    [[nodiscard]] FaultKind kind() const noexcept { return fault_.kind; }
    [[nodiscard]] Int index() const noexcept { return fault_.index; }

private:
    Fault fault_;
};

/// Scalar arguments of one operation, indexed like its parameter list. The
/// state parameter's slot is ignored.
struct Env {
    std::vector<Value> params;
    const ConcreteState* pre_state = nullptr;  ///< binds `old`

    static Env for_op(const OperationDecl& op, const std::map<std::string, Value, std::less<>>& args,
                      const ConcreteState* pre = nullptr);
};

/// Throws EvalError on a fault.
Value eval_expr(const Expr& e, const Env& env, const ConcreteState& state);
bool holds(const Expr& f, const Env& env, const ConcreteState& state, const ConcreteState* pre_state = nullptr);
/// Returns the post-state; `state` itself is untouched. Preconditions are not checked.
ConcreteState exec_body(const OperationDecl& op, const Env& args, const ConcreteState& state);

// ---- Low-level interface shared by the bounded checker and the simulator ----

enum class Truth : std::uint8_t { no, yes, unknown, fault };

std::string_view to_string(Truth t);

/// How much of a state is assigned during enumeration: fields below `fixed`
/// are complete; for the array field at index `fixed`, `cells` < 0 means its
/// length is still open, otherwise its length and first `cells` cells are set.
struct Knowledge {
    int fixed = 0;
    int cells = -1;
};

struct PartialView {
    std::span<const Knowledge> states;  ///< per state slot
    int scalars_known = 0;              ///< scalar slots below this are assigned
};

/// Evaluation context. `scalars` holds ints and bools (as 0/1) by slot,
/// `states` and `old_states` are indexed by state slot.
struct Frame {
    std::span<const Int> scalars;
    std::span<const ConcreteState* const> states;
    std::span<const ConcreteState* const> old_states;
    const PartialView* partial = nullptr;
};

/// Truth of a boolean expression. On `fault`, `*fault` (if given) describes it.
Truth eval_truth(const Expr& f, const Frame& frame, Fault* fault = nullptr);

/// Runs `op`'s body in place. `args` is indexed like the op's parameter list.
/// On a fault the state is left partially updated and the fault is returned.
Fault exec_in_place(const OperationDecl& op, std::span<const Int> args, ConcreteState& state);

/// Scalar encoding used by Frame: bools map to 0/1.
Int scalar_of(const Value& v);

}  // namespace cise
