#include <cise/diagnostic.hpp>

#include <sstream>

namespace cise {

namespace {

std::string summarize(SpecErrorKind kind, const std::vector<Diagnostic>& diagnostics) {
    std::ostringstream out;
    out << to_string(kind);
    if (!diagnostics.empty()) {
        out << ": " << diagnostics.front().message;
        if (diagnostics.size() > 1) out << " (+" << diagnostics.size() - 1 << " more)";
    }
    return out.str();
}

}  // namespace

std::string format_diagnostic(const Diagnostic& d, std::string_view file) {
    std::ostringstream out;
    out << file << ':' << d.span.begin.line << ':' << d.span.begin.col << ": ";
    switch (d.severity) {
        case Severity::error:   out << "error"; break;
        case Severity::warning: out << "warning"; break;
        case Severity::note:    out << "note"; break;
    }
    out << ": " << d.message;
    return out.str();
}

std::string_view to_string(SpecErrorKind kind) {
    switch (kind) {
        case SpecErrorKind::parse:             return "parse error";
        case SpecErrorKind::duplicate_tag:     return "duplicate tag";
        case SpecErrorKind::missing_state_tag: return "missing state tag";
        case SpecErrorKind::dangling_conflict: return "dangling conflict";
        case SpecErrorKind::type:              return "type error";
    }
    return "error";
}

SpecError::SpecError(SpecErrorKind kind, std::vector<Diagnostic> diagnostics)
    : std::runtime_error(summarize(kind, diagnostics)), kind_(kind), diagnostics_(std::move(diagnostics)) {}

}  // namespace cise
