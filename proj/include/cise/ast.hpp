/// @file ast.hpp
/// @brief Abstract syntax of `.cise` specifications.
///
/// The tree is produced by the parser with every `type` left as
/// `Type::unknown` and every `ref` unresolved; the type checker fills both in
/// place. Spans are carried for diagnostics only and never participate in
/// structural comparison (see `to_sexpr`).

#pragma once

#include <cise/diagnostic.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cise {

using Int = std::int64_t;

enum class Type : std::uint8_t {
    unknown,
    integer,
    boolean,
    int_array,
    state,   ///< the `[@state]` record; only legal as a parameter type
    error,   ///< poisoned by an earlier diagnostic; suppresses cascades
};

std::string_view to_string(Type t);

/// Declared type of a field or parameter as written in the source.
struct TypeExpr {
    Type kind = Type::unknown;
    std::string name;  ///< record type name when kind == Type::state

    friend bool operator==(const TypeExpr&, const TypeExpr&) = default;
};

enum class ExprKind : std::uint8_t {
    int_lit,
    bool_lit,
    var,       ///< identifier: parameter, bare state field, bound variable, or state variable
    field,     ///< `s.f`; kids[0] is the state variable
    index,     ///< `a[i]`; kids = {array, index}
    length,    ///< `length a`
    old,       ///< `old e`; resolves against the pre-state
    unary,
    binary,
    quant,     ///< kids = {lo, hi, body} or, when over_array, {array, body}
    array_eq,  ///< `array_eq a b`
};

enum class UnaryOp : std::uint8_t { neg, logical_not };

enum class BinaryOp : std::uint8_t {
    add, sub, mul,
    eq, neq, lt, le, gt, ge,
    logical_and, logical_or, implies,
};

enum class Quantifier : std::uint8_t { forall, exists };

std::string_view spelling(UnaryOp op);
std::string_view spelling(BinaryOp op);
std::string_view spelling(Quantifier q);

enum class RefKind : std::uint8_t {
    unresolved,
    param,      ///< index = scalar slot (operation parameter or obligation symbol)
    state_var,  ///< index = state slot
    field,      ///< bare field of the implicit state (slot 0); index = field
    bound,      ///< index = quantifier nesting depth (0 = outermost)
};

struct Ref {
    RefKind kind = RefKind::unresolved;
    int index = -1;
};

struct Expr {
    ExprKind kind = ExprKind::int_lit;
    Type type = Type::unknown;
    Int value = 0;
    std::string name;
    UnaryOp unary = UnaryOp::neg;
    BinaryOp binary = BinaryOp::add;
    Quantifier quant = Quantifier::forall;
    bool over_array = false;
    Ref ref;
    std::vector<Expr> kids;
    Span span;

    static Expr int_lit(Int v, Span s = {});
    static Expr bool_lit(bool v, Span s = {});
    static Expr var(std::string name, Span s = {});
    static Expr field(Expr state, std::string field, Span s = {});
    static Expr index(Expr array, Expr idx, Span s = {});
    static Expr length(Expr array, Span s = {});
    static Expr old(Expr e, Span s = {});
    static Expr unary_op(UnaryOp op, Expr e, Span s = {});
    static Expr binary_op(BinaryOp op, Expr lhs, Expr rhs, Span s = {});
    static Expr range_quant(Quantifier q, std::string var, Expr lo, Expr hi, Expr body, Span s = {});
    static Expr array_quant(Quantifier q, std::string var, Expr array, Expr body, Span s = {});
    static Expr array_equal(Expr a, Expr b, Span s = {});

    [[nodiscard]] const Expr& body() const { return kids.back(); }
};

/// Conjunction of `parts` in order; `true` when empty.
Expr conjoin(std::vector<Expr> parts);

enum class StmtKind : std::uint8_t { skip, assign, if_then_else };

struct Stmt {
    StmtKind kind = StmtKind::skip;
    Expr target;  ///< assign: `s.f` or `s.f[i]`
    Expr value;   ///< assign: right-hand side; if: condition
    std::vector<Stmt> then_body;
    std::vector<Stmt> else_body;
    bool has_else = false;
    Span span;
};

struct Param {
    std::string name;
    TypeExpr type;
    Span span;
};

struct FieldDecl {
    std::string name;
    TypeExpr type;
    Span span;
};

struct StateDecl {
    std::string name;
    std::vector<FieldDecl> fields;
    std::optional<Expr> invariant;
    Span span;

    [[nodiscard]] int field_index(std::string_view field) const;
};

struct OperationDecl {
    std::string name;
    std::vector<Param> params;
    std::vector<Expr> requires_clauses;  ///< conjoined in source order
    std::vector<Expr> ensures_clauses;   ///< conjoined in source order
    std::vector<Stmt> body;
    Span span;
    int state_param = -1;  ///< set by the type checker

    [[nodiscard]] int param_index(std::string_view param) const;
};

/// `predicate name [@state_eq] (a b : state) = body`
struct EqualityDecl {
    std::string name;
    std::string lhs;
    std::string rhs;
    std::string state_type;
    Expr body;
    Span span;
};

struct ConflictDecl {
    std::string first;
    std::string second;
    Span span;
};

struct SpecAst {
    std::optional<std::string> module_name;
    StateDecl state;
    std::vector<OperationDecl> operations;
    std::optional<EqualityDecl> equality;
    std::vector<ConflictDecl> conflicts;

    [[nodiscard]] int operation_index(std::string_view op) const;
};

/// Span-free S-expression dump; two trees are structurally identical iff
/// their dumps are equal.
std::string to_sexpr(const Expr& e);
std::string to_sexpr(const SpecAst& spec);

}  // namespace cise
