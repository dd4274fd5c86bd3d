/// @file report.hpp
/// @brief Text and JSON renderings of an analysis and of a simulation.
///
/// JSON output carries no timestamps or timings, so two runs with the same
/// inputs produce the same bytes.

#pragma once

#include <cise/sim.hpp>
#include <cise/tokens.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cise {

inline constexpr const char* tool_version = "0.3.0";

struct ReportMeta {
    std::string spec_path;
    std::string spec_sha256;  ///< of the source bytes as read
    std::string tool_sha256;  ///< of the running executable; empty if unknown
};

/// One cell of the pair matrix: an operation with itself or with another.
struct MatrixEntry {
    std::string first;
    std::string second;
    bool self = false;
    bool skipped = false;               ///< declared conflict, not analyzed
    std::string obligation;             ///< empty when skipped
    std::optional<Outcome> commutes;    ///< unset for self entries and skipped pairs
    std::optional<Outcome> stable;      ///< unset for skipped pairs
    std::optional<Backend> backend;
};

/// All n + n(n-1)/2 entries: for each operation in declaration order, itself
/// then every later operation.
std::vector<MatrixEntry> pair_matrix(const Analysis& an);

/// Conflicts found by the analysis, ignoring declared ones.
int undeclared_conflicts(const ConflictRelation& rel);

/// 1 when the analysis found a conflict the author did not declare, 2 when
/// nothing was found but some obligation stayed undetermined or the two
/// engines disagreed, else 0.
int check_exit_code(const Analysis& an, const ConflictRelation& rel);

nlohmann::json witness_json(const Witness& w, const Obligation& ob);

nlohmann::json report_json(const Analysis& an, const ConflictRelation& rel, const TokenSystem& ts,
                           const ReportMeta& meta);
std::string report_text(const Analysis& an, const ConflictRelation& rel, const TokenSystem& ts,
                        const ReportMeta& meta, bool listings = false);

nlohmann::json trace_json(const RunTrace& t, const TypedSpec& spec);

/// Results of one simulation per delivery model, sharing tokens and spec.
nlohmann::json sim_json(const std::vector<SimReport>& reports, const TypedSpec& spec, const TokenSystem& ts,
                        const ReportMeta& meta);
std::string sim_text(const std::vector<SimReport>& reports, const TypedSpec& spec, const TokenSystem& ts,
                     const ReportMeta& meta);

}  // namespace cise
