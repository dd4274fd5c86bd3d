#include <cise/tokens.hpp>

#include <algorithm>
#include <map>

namespace cise {

namespace {

std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
    return a <= b ? std::pair{a, b} : std::pair{b, a};
}

EvidenceKind evidence_kind(AssertionRole role) {
    return role == AssertionRole::state_equality ? EvidenceKind::non_commutative : EvidenceKind::stability_violation;
}

}  // namespace

std::string_view to_string(EvidenceKind k) {
    switch (k) {
        case EvidenceKind::declared_by_user:    return "declared_by_user";
        case EvidenceKind::stability_violation: return "stability_violation";
        case EvidenceKind::non_commutative:     return "non_commutative";
    }
    return "?";
}

const ConflictPair* ConflictRelation::find(const std::string& a, const std::string& b) const {
    const auto [x, y] = ordered(a, b);
    for (const auto& p : pairs) {
        if (p.first == x && p.second == y) return &p;
    }
    return nullptr;
}

ConflictRelation build_conflicts(std::span<const ObligationResult> results, std::span<const ConflictDecl> declared) {
    std::map<std::pair<std::string, std::string>, std::vector<Evidence>> rel;
    for (const auto& d : declared) {
        auto& ev = rel[ordered(d.first, d.second)];
        if (ev.empty()) ev.push_back(Evidence{EvidenceKind::declared_by_user, {}, -1, "declared conflict", {}, {}});
    }
    for (const auto& r : results) {
        if (r.ob.kind == ObligationKind::safety) continue;
        const auto key = r.ob.kind == ObligationKind::self ? ordered(r.ob.ops[0], r.ob.ops[0])
                                                           : ordered(r.ob.ops[0], r.ob.ops[1]);
        for (std::size_t a = 0; a < r.assertions.size(); ++a) {
            const AssertionResult& ar = r.assertions[a];
            if (ar.outcome != Outcome::fails) continue;
            rel[key].push_back(Evidence{evidence_kind(ar.role), r.ob.id, static_cast<int>(a), ar.label, ar.witness,
                                        ar.model});
        }
    }
    ConflictRelation out;
    for (auto& [key, ev] : rel) out.pairs.push_back(ConflictPair{key.first, key.second, std::move(ev)});
    return out;
}

bool TokenSystem::tokens_conflict(int t, int u) const {
    return std::any_of(conflicts.begin(), conflicts.end(), [&](const auto& c) {
        return (c.first == t && c.second == u) || (c.first == u && c.second == t);
    });
}

const std::vector<int>& TokenSystem::tokens_of(const std::string& op) const {
    static const std::vector<int> none;
    for (const auto& a : assignment) {
        if (a.op == op) return a.tokens;
    }
    return none;
}

bool TokenSystem::excludes(const std::string& f, const std::string& g) const {
    for (int t : tokens_of(f)) {
        for (int u : tokens_of(g)) {
            if (tokens_conflict(t, u)) return true;
        }
    }
    return false;
}

TokenSystem synthesize(const ConflictRelation& rel, const std::vector<std::string>& ops) {
    TokenSystem ts;
    for (const auto& p : rel.pairs) {
        const int t = static_cast<int>(ts.tokens.size());
        ts.tokens.push_back(Token{"tok_" + p.first + "_" + p.second, p.first, p.second});
        ts.conflicts.emplace_back(t, t);
    }
    for (const auto& op : ops) {
        OperationTokens a{op, {}};
        for (int t = 0; t < static_cast<int>(ts.tokens.size()); ++t) {
            const Token& tok = ts.tokens[static_cast<std::size_t>(t)];
            if (tok.first == op || tok.second == op) a.tokens.push_back(t);
        }
        ts.assignment.push_back(std::move(a));
    }
    return ts;
}

TokenSystem without_token(const TokenSystem& ts, const std::string& token) {
    TokenSystem out;
    std::vector<int> remap(ts.tokens.size(), -1);
    for (std::size_t t = 0; t < ts.tokens.size(); ++t) {
        if (ts.tokens[t].name == token) continue;
        remap[t] = static_cast<int>(out.tokens.size());
        out.tokens.push_back(ts.tokens[t]);
    }
    for (const auto& [a, b] : ts.conflicts) {
        const int x = remap[static_cast<std::size_t>(a)];
        const int y = remap[static_cast<std::size_t>(b)];
        if (x >= 0 && y >= 0) out.conflicts.emplace_back(x, y);
    }
    for (const auto& a : ts.assignment) {
        OperationTokens o{a.op, {}};
        for (int t : a.tokens) {
            if (remap[static_cast<std::size_t>(t)] >= 0) o.tokens.push_back(remap[static_cast<std::size_t>(t)]);
        }
        out.assignment.push_back(std::move(o));
    }
    return out;
}

}  // namespace cise
