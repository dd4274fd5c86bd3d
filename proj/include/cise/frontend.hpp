#pragma once

#include <cise/ast.hpp>

#include <string>
#include <string_view>

namespace cise {

/// Parses a `.cise` source. Throws SpecError (parse, duplicate_tag,
/// missing_state_tag, dangling_conflict) on failure; syntax errors stop at the
/// first offending token and name what was expected there.
SpecAst parse_spec(std::string_view source);

/// A specification whose expressions all carry types and resolved references.
struct TypedSpec {
    SpecAst ast;
    std::string fingerprint;  ///< SHA-256 of the canonical printed form

    [[nodiscard]] const OperationDecl& op(int i) const { return ast.operations.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] int op_count() const { return static_cast<int>(ast.operations.size()); }
};

/// Annotates every expression with its type and resolves identifiers.
/// All problems are collected and thrown together as one SpecError(type).
TypedSpec typecheck(SpecAst ast);

/// Convenience: parse then typecheck.
TypedSpec load_spec(std::string_view source);

/// Canonical source text. Reparsing it yields a structurally identical tree.
std::string print_spec(const SpecAst& spec);
std::string round_trip_print(const TypedSpec& spec);

/// Source form of a single expression (used by reports and obligation listings).
std::string print_expr(const Expr& e);

}  // namespace cise
