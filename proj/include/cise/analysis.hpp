/// @file analysis.hpp
/// @brief Runs every obligation through the bounded checker and, optionally,
/// an external solver, and merges the two into one outcome per assertion.

#pragma once

#include <cise/bounded.hpp>
#include <cise/smt.hpp>
#include <cise/vcgen.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cise {

enum class Outcome { holds, fails, undetermined };

std::string_view to_string(Outcome o);

/// Which engine the obligation's result rests on.
enum class Backend { bounded, solver_proved, solver_counter_model, solver_timeout_bounded };

std::string_view to_string(Backend b);

struct AssertionResult {
    AssertionRole role = AssertionRole::trivial;
    std::string label;
    Outcome outcome = Outcome::holds;
    bool proved = false;              ///< the solver showed it for unbounded inputs
    std::optional<Witness> witness;   ///< bounded counterexample
    std::string model;                ///< solver counter-model when bounded found none
    bool disagreement = false;        ///< solver proved what the bounded checker refuted
};

struct ObligationResult {
    Obligation ob;
    Verdict bounded;
    std::optional<SolverVerdict> solver;
    std::string solver_error;  ///< set when the solver could not be run or misbehaved
    Backend backend = Backend::bounded;
    Outcome outcome = Outcome::holds;
    std::vector<AssertionResult> assertions;  ///< parallel to ob.assertions
};

struct AnalysisOptions {
    Bounds bounds;
    VcOptions vc;
    std::optional<std::string> solver;  ///< command line, e.g. "z3 -in"
    double timeout_s = 10;
};

struct Analysis {
    std::shared_ptr<const TypedSpec> spec;
    AnalysisOptions options;
    std::vector<ObligationResult> results;  ///< sorted by obligation id
    std::vector<SkippedPair> skipped;

    [[nodiscard]] const ObligationResult* find(const std::string& id) const;
};

/// Merges a bounded verdict with an optional solver verdict.
ObligationResult combine(Obligation ob, Verdict bounded, std::optional<SolverVerdict> solver);

Analysis analyze(const std::shared_ptr<const TypedSpec>& spec, const AnalysisOptions& opt);

}  // namespace cise
