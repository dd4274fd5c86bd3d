/// @file tokens.hpp
/// @brief Conflict relation from analysis outcomes, and the token system it induces.

#pragma once

#include <cise/analysis.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cise {

enum class EvidenceKind { declared_by_user, stability_violation, non_commutative };

std::string_view to_string(EvidenceKind k);

struct Evidence {
    EvidenceKind kind = EvidenceKind::declared_by_user;
    std::string obligation;  ///< empty for declarations
    int assertion = -1;
    std::string label;
    std::optional<Witness> witness;
    std::string model;  ///< solver counter-model when there is no bounded witness
};

/// Unordered pair of operation names, stored with first <= second.
struct ConflictPair {
    std::string first;
    std::string second;
    std::vector<Evidence> evidence;
};

struct ConflictRelation {
    std::vector<ConflictPair> pairs;  ///< sorted by (first, second)

    [[nodiscard]] const ConflictPair* find(const std::string& a, const std::string& b) const;
    [[nodiscard]] bool contains(const std::string& a, const std::string& b) const { return find(a, b) != nullptr; }
};

/// A pair enters the relation if it is declared, if its pair obligation
/// failed a precondition (stability) or the final equality (commutativity),
/// or if its self obligation failed. A body fault inside a pair or self
/// obligation counts as a stability violation.
ConflictRelation build_conflicts(std::span<const ObligationResult> results, std::span<const ConflictDecl> declared);

struct Token {
    std::string name;  ///< tok_<first>_<second>
    std::string first;
    std::string second;
};

struct OperationTokens {
    std::string op;
    std::vector<int> tokens;  ///< indices into TokenSystem::tokens, ascending
};

struct TokenSystem {
    std::vector<Token> tokens;
    std::vector<std::pair<int, int>> conflicts;  ///< symmetric relation over token indices, listed once
    std::vector<OperationTokens> assignment;     ///< in operation declaration order

    [[nodiscard]] bool tokens_conflict(int t, int u) const;
    [[nodiscard]] const std::vector<int>& tokens_of(const std::string& op) const;
    /// Whether the two operations may never run concurrently.
    [[nodiscard]] bool excludes(const std::string& f, const std::string& g) const;
};

/// One self-conflicting token per relation entry, held by both members.
TokenSystem synthesize(const ConflictRelation& rel, const std::vector<std::string>& ops);

/// Same system without the named token (used for ablation).
TokenSystem without_token(const TokenSystem& ts, const std::string& token);

}  // namespace cise
