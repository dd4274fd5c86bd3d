#include <cise/analysis.hpp>

#include <algorithm>

namespace cise {

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::holds:        return "holds";
        case Outcome::fails:        return "fails";
        case Outcome::undetermined: return "undetermined";
    }
    return "?";
}

std::string_view to_string(Backend b) {
    switch (b) {
        case Backend::bounded:                return "bounded";
        case Backend::solver_proved:          return "solver_proved";
        case Backend::solver_counter_model:   return "solver_counter_model";
        case Backend::solver_timeout_bounded: return "solver_timeout_bounded";
    }
    return "?";
}

const ObligationResult* Analysis::find(const std::string& id) const {
    for (const auto& r : results) {
        if (r.ob.id == id) return &r;
    }
    return nullptr;
}

ObligationResult combine(Obligation ob, Verdict bounded, std::optional<SolverVerdict> solver) {
    ObligationResult r;
    r.assertions.resize(ob.assertions.size());
    std::vector<const GoalResult*> goal_of(ob.assertions.size(), nullptr);
    if (solver) {
        for (const auto& g : solver->goals) goal_of[static_cast<std::size_t>(g.assertion)] = &g;
    }
    for (std::size_t a = 0; a < ob.assertions.size(); ++a) {
        AssertionResult& out = r.assertions[a];
        out.role = ob.assertions[a].role;
        out.label = ob.assertions[a].label;
        const AssertionVerdict& bv = bounded.assertions[a];
        const GoalResult* g = goal_of[a];
        out.proved = g != nullptr && g->status == GoalStatus::proved;
        switch (bv.status) {
            case AssertionStatus::fails:
                out.outcome = Outcome::fails;
                out.witness = bv.witness;
                out.disagreement = out.proved;
                break;
            case AssertionStatus::undetermined:
                out.outcome = out.proved ? Outcome::holds : Outcome::undetermined;
                break;
            case AssertionStatus::holds_within_bounds:
                out.outcome = Outcome::holds;
                break;
        }
        if (out.outcome != Outcome::fails && g != nullptr && g->status == GoalStatus::counter_model) {
            out.outcome = Outcome::fails;
            out.model = g->model;
        }
    }

    bool any_fail = false;
    bool any_undetermined = false;
    for (const auto& a : r.assertions) {
        any_fail = any_fail || a.outcome == Outcome::fails;
        any_undetermined = any_undetermined || a.outcome == Outcome::undetermined;
    }
    r.outcome = any_fail ? Outcome::fails : any_undetermined ? Outcome::undetermined : Outcome::holds;

    if (solver) {
        bool all_proved = true;
        bool refuted = false;
        for (const auto& g : solver->goals) {
            all_proved = all_proved && g.status == GoalStatus::proved;
            refuted = refuted || g.status == GoalStatus::counter_model;
        }
        r.backend = refuted      ? Backend::solver_counter_model
                    : all_proved ? Backend::solver_proved
                                 : Backend::solver_timeout_bounded;
    }
    r.ob = std::move(ob);
    r.bounded = std::move(bounded);
    r.solver = std::move(solver);
    return r;
}

Analysis analyze(const std::shared_ptr<const TypedSpec>& spec, const AnalysisOptions& opt) {
    validate(opt.bounds);
    Analysis out;
    out.spec = spec;
    out.options = opt;
    ObligationSet set = gen_all(spec, opt.vc);
    out.skipped = std::move(set.skipped);
    for (auto& ob : set.obligations) {
        Verdict v = check(ob, opt.bounds);
        std::optional<SolverVerdict> sv;
        std::string error;
        if (opt.solver) {
            try {
                sv = discharge(emit(ob), *opt.solver, opt.timeout_s);
            } catch (const ProtocolError& e) {
                error = e.what();
            } catch (const UnsupportedConstruct& e) {
                error = e.what();
            }
        }
        ObligationResult r = combine(std::move(ob), std::move(v), std::move(sv));
        if (!error.empty()) {
            r.solver_error = std::move(error);
            r.backend = Backend::solver_timeout_bounded;
        }
        out.results.push_back(std::move(r));
    }
    std::sort(out.results.begin(), out.results.end(),
              [](const ObligationResult& a, const ObligationResult& b) { return a.ob.id < b.ob.id; });
    return out;
}

}  // namespace cise
