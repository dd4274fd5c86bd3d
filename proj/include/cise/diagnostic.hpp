#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cise {

struct SourcePos {
    int line = 0;  // 1-based; 0 means "no position"
    int col = 0;
};

struct Span {
    SourcePos begin;
    SourcePos end;
};

enum class Severity { error, warning, note };

struct Diagnostic {
    Span span;
    Severity severity = Severity::error;
    std::string message;
};

/// Renders `file:line:col: severity: message`.
std::string format_diagnostic(const Diagnostic& d, std::string_view file);

enum class SpecErrorKind {
    parse,               ///< syntax error
    duplicate_tag,       ///< two `[@state]` types or two `[@state_eq]` predicates
    missing_state_tag,   ///< no `[@state]` type at all
    dangling_conflict,   ///< `conflict` names an undeclared operation
    type,                ///< one or more type errors (all reported together)
};

std::string_view to_string(SpecErrorKind kind);

/// Raised by the front end. Carries every diagnostic collected before giving up.
class SpecError : public std::runtime_error {
public:
    SpecError(SpecErrorKind kind, std::vector<Diagnostic> diagnostics);

    [[nodiscard]] SpecErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    SpecErrorKind kind_;
    std::vector<Diagnostic> diagnostics_;
};

}  // namespace cise
