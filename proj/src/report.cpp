#include <cise/report.hpp>

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace cise {

using nlohmann::json;

namespace {

json value_json(const Value& v) {
    if (const auto* i = std::get_if<Int>(&v)) return *i;
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    return std::get<IntArray>(v);
}

json state_json(const ConcreteState& s, const StateDecl& decl) {
    json out = json::object();
    for (std::size_t f = 0; f < decl.fields.size() && f < s.fields.size(); ++f) {
        out[decl.fields[f].name] = value_json(s.fields[f]);
    }
    return out;
}

json bounds_json(const Bounds& b) {
    return {{"int_lo", b.lo}, {"int_hi", b.hi}, {"min_len", b.min_len}, {"max_len", b.max_len},
            {"max_nodes", b.max_nodes}};
}

std::string fault_name(FaultKind k) {
    switch (k) {
        case FaultKind::none:                return "none";
        case FaultKind::index_out_of_bounds: return "index_out_of_bounds";
        case FaultKind::overflow:            return "overflow";
        case FaultKind::range_too_large:     return "range_too_large";
    }
    return "?";
}

json opt_outcome(const std::optional<Outcome>& o) {
    return o ? json(std::string(to_string(*o))) : json(nullptr);
}

const ObligationResult* result_for(const Analysis& an, ObligationKind kind, const std::string& a,
                                   const std::string& b = {}) {
    for (const auto& r : an.results) {
        if (r.ob.kind != kind || r.ob.ops.empty() || r.ob.ops[0] != a) continue;
        if (kind != ObligationKind::pair || (r.ob.ops.size() == 2 && r.ob.ops[1] == b)) return &r;
    }
    return nullptr;
}

bool is_declared(const SpecAst& spec, const std::string& a, const std::string& b) {
    return std::any_of(spec.conflicts.begin(), spec.conflicts.end(), [&](const ConflictDecl& d) {
        return (d.first == a && d.second == b) || (d.first == b && d.second == a);
    });
}

// Folds the outcomes of assertions with the given roles (plus memory safety).
Outcome fold(const ObligationResult& r, std::initializer_list<AssertionRole> roles) {
    Outcome acc = Outcome::holds;
    for (const auto& a : r.assertions) {
        if (std::find(roles.begin(), roles.end(), a.role) == roles.end()) continue;
        if (a.outcome == Outcome::fails) return Outcome::fails;
        if (a.outcome == Outcome::undetermined) acc = Outcome::undetermined;
    }
    return acc;
}

std::string verdict_word(Outcome o, bool proved) {
    switch (o) {
        case Outcome::holds:        return proved ? "valid" : "valid within bounds";
        case Outcome::fails:        return "fails";
        case Outcome::undetermined: return "undetermined";
    }
    return "?";
}

bool obligation_proved(const ObligationResult& r) {
    return std::all_of(r.assertions.begin(), r.assertions.end(), [](const AssertionResult& a) {
        return a.proved || a.role == AssertionRole::memory_safety || a.role == AssertionRole::trivial;
    }) && r.backend == Backend::solver_proved;
}

std::string backend_text(const ObligationResult& r) {
    const Bounds& b = r.bounded.bounds;
    std::ostringstream out;
    out << to_string(r.backend);
    if (r.backend != Backend::solver_proved) {
        out << " [" << b.lo << ", " << b.hi << "] len " << b.min_len << ".." << b.max_len;
    }
    return out.str();
}

std::string cell(const std::optional<Outcome>& o) { return o ? std::string(to_string(*o)) : "-"; }

std::string args_text(const SimOp& o, const TypedSpec& spec) {
    const auto& d = spec.op(o.op);
    std::string s;
    for (std::size_t p = 0; p < d.params.size(); ++p) {
        if (static_cast<int>(p) == d.state_param) continue;
        if (!s.empty()) s += ", ";
        s += d.params[p].name + " = ";
        s += d.params[p].type.kind == Type::boolean ? (o.args[p] != 0 ? "true" : "false") : std::to_string(o.args[p]);
    }
    return s;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

json tokens_json(const TokenSystem& ts) {
    json tokens = json::array();
    for (const auto& t : ts.tokens) tokens.push_back({{"name", t.name}, {"pair", {t.first, t.second}}});
    json conflicts = json::array();
    for (const auto& [a, b] : ts.conflicts) {
        conflicts.push_back({ts.tokens[static_cast<std::size_t>(a)].name, ts.tokens[static_cast<std::size_t>(b)].name});
    }
    json assignment = json::array();
    for (const auto& a : ts.assignment) {
        json names = json::array();
        for (int t : a.tokens) names.push_back(ts.tokens[static_cast<std::size_t>(t)].name);
        assignment.push_back({{"operation", a.op}, {"tokens", names}});
    }
    return {{"tokens", tokens}, {"conflicts", conflicts}, {"assignment", assignment}};
}

void tokens_text(std::ostream& out, const TokenSystem& ts) {
    out << "tokens\n";
    if (ts.tokens.empty()) out << "  (none)\n";
    for (std::size_t t = 0; t < ts.tokens.size(); ++t) {
        std::string with;
        for (const auto& [a, b] : ts.conflicts) {
            const int other = a == static_cast<int>(t) ? b : b == static_cast<int>(t) ? a : -1;
            if (other < 0) continue;
            if (!with.empty()) with += ", ";
            with += other == static_cast<int>(t) ? "itself" : ts.tokens[static_cast<std::size_t>(other)].name;
        }
        out << "  " << ts.tokens[t].name << "  conflicts with " << (with.empty() ? "nothing" : with) << '\n';
    }
    std::size_t w = 0;
    for (const auto& a : ts.assignment) w = std::max(w, a.op.size());
    for (const auto& a : ts.assignment) {
        std::string names;
        for (int t : a.tokens) names += (names.empty() ? "" : ", ") + ts.tokens[static_cast<std::size_t>(t)].name;
        out << "  " << std::left << std::setw(static_cast<int>(w)) << a.op << "  {" << names << "}\n";
    }
}

json meta_json(const ReportMeta& meta, const TypedSpec& spec) {
    return {{"tool", {{"name", "cise-check"}, {"version", tool_version}, {"sha256", meta.tool_sha256}}},
            {"spec",
             {{"path", meta.spec_path},
              {"module", spec.ast.module_name ? json(*spec.ast.module_name) : json(nullptr)},
              {"sha256", meta.spec_sha256},
              {"canonical_sha256", spec.fingerprint}}}};
}

}  // namespace

std::vector<MatrixEntry> pair_matrix(const Analysis& an) {
    std::vector<MatrixEntry> out;
    const auto& ops = an.spec->ast.operations;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        for (std::size_t j = i; j < ops.size(); ++j) {
            MatrixEntry e;
            e.first = ops[i].name;
            e.second = ops[j].name;
            e.self = i == j;
            const ObligationResult* r =
                e.self ? result_for(an, ObligationKind::self, e.first)
                       : result_for(an, ObligationKind::pair, e.first, e.second);
            if (r == nullptr) {
                e.skipped = is_declared(an.spec->ast, e.first, e.second);
            } else {
                e.obligation = r->ob.id;
                e.backend = r->backend;
                e.stable = fold(*r, {AssertionRole::precondition, AssertionRole::memory_safety});
                if (!e.self) e.commutes = fold(*r, {AssertionRole::state_equality});
            }
            out.push_back(std::move(e));
        }
    }
    return out;
}

int undeclared_conflicts(const ConflictRelation& rel) {
    int n = 0;
    for (const auto& p : rel.pairs) {
        n += std::any_of(p.evidence.begin(), p.evidence.end(),
                         [](const Evidence& e) { return e.kind != EvidenceKind::declared_by_user; })
                 ? 1
                 : 0;
    }
    return n;
}

int check_exit_code(const Analysis& an, const ConflictRelation& rel) {
    if (undeclared_conflicts(rel) > 0) return 1;
    for (const auto& r : an.results) {
        if (r.outcome != Outcome::holds) return 2;
        for (const auto& a : r.assertions) {
            if (a.disagreement) return 2;
        }
    }
    return 0;
}

nlohmann::json witness_json(const Witness& w, const Obligation& ob) {
    const StateDecl& decl = ob.spec->ast.state;
    json scalars = json::object();
    for (std::size_t i = 0; i < w.valuation.scalars.size(); ++i) {
        const Int v = w.valuation.scalars[i];
        scalars[ob.scalars[i].name] = ob.scalars[i].type == Type::boolean ? json(v != 0) : json(v);
    }
    json states = json::object();
    for (std::size_t i = 0; i < w.valuation.states.size(); ++i) {
        states[ob.states[i]] = state_json(w.valuation.states[i], decl);
    }
    json out = {{"assertion", w.assertion},
                {"scalars", scalars},
                {"states", states},
                {"text", describe(w.valuation, ob)},
                {"fault", nullptr}};
    if (w.fault) {
        out["fault"] = {{"kind", fault_name(w.fault.kind)},
                        {"call", w.fault_call},
                        {"index", w.fault.index},
                        {"length", w.fault.length}};
    }
    out["replays"] = replay(w, ob).reproduced;
    return out;
}

nlohmann::json report_json(const Analysis& an, const ConflictRelation& rel, const TokenSystem& ts,
                           const ReportMeta& meta) {
    const TypedSpec& spec = *an.spec;
    json doc = meta_json(meta, spec);
    doc["options"] = {{"bounds", bounds_json(an.options.bounds)},
                      {"assume_invariant", an.options.vc.assume_invariant},
                      {"solver", an.options.solver ? json(*an.options.solver) : json(nullptr)},
                      {"timeout_s", an.options.timeout_s}};

    json safety = json::array();
    for (const auto& op : spec.ast.operations) {
        const ObligationResult* r = result_for(an, ObligationKind::safety, op.name);
        safety.push_back({{"operation", op.name},
                          {"obligation", r->ob.id},
                          {"outcome", std::string(to_string(r->outcome))},
                          {"proved", obligation_proved(*r)},
                          {"backend", std::string(to_string(r->backend))}});
    }
    doc["safety"] = safety;

    json matrix = json::array();
    for (const auto& e : pair_matrix(an)) {
        matrix.push_back({{"first", e.first},
                          {"second", e.second},
                          {"kind", e.self ? "self" : "pair"},
                          {"status", e.skipped ? "declared_skipped" : "analyzed"},
                          {"obligation", e.obligation.empty() ? json(nullptr) : json(e.obligation)},
                          {"commutes", opt_outcome(e.commutes)},
                          {"stable", opt_outcome(e.stable)},
                          {"backend", e.backend ? json(std::string(to_string(*e.backend))) : json(nullptr)}});
    }
    doc["matrix"] = matrix;

    json obligations = json::array();
    for (const auto& r : an.results) {
        json assertions = json::array();
        for (std::size_t a = 0; a < r.assertions.size(); ++a) {
            const AssertionResult& ar = r.assertions[a];
            const Assertion& src = r.ob.assertions[a];
            assertions.push_back({{"index", a},
                                  {"role", std::string(to_string(ar.role))},
                                  {"label", ar.label},
                                  {"before_call", src.before_call},
                                  {"formula", print_expr(src.formula)},
                                  {"outcome", std::string(to_string(ar.outcome))},
                                  {"proved", ar.proved},
                                  {"disagreement", ar.disagreement},
                                  {"witness", ar.witness ? witness_json(*ar.witness, r.ob) : json(nullptr)},
                                  {"model", ar.model.empty() ? json(nullptr) : json(ar.model)}});
        }
        json solver = nullptr;
        if (r.solver) {
            json goals = json::array();
            for (const auto& g : r.solver->goals) {
                goals.push_back({{"assertion", g.assertion}, {"status", std::string(to_string(g.status))}});
            }
            solver = {{"goals", goals}, {"timed_out", r.solver->timed_out}};
        }
        obligations.push_back({{"id", r.ob.id},
                               {"kind", std::string(to_string(r.ob.kind))},
                               {"operations", r.ob.ops},
                               {"outcome", std::string(to_string(r.outcome))},
                               {"backend", std::string(to_string(r.backend))},
                               {"bounded",
                                {{"status", std::string(to_string(r.bounded.status))},
                                 {"nodes", r.bounded.stats.nodes},
                                 {"models", r.bounded.stats.models}}},
                               {"solver", solver},
                               {"solver_error", r.solver_error.empty() ? json(nullptr) : json(r.solver_error)},
                               {"assertions", assertions}});
    }
    doc["obligations"] = obligations;

    json skipped = json::array();
    for (const auto& s : an.skipped) skipped.push_back({s.first, s.second});
    doc["skipped"] = skipped;

    json conflicts = json::array();
    for (const auto& p : rel.pairs) {
        json evidence = json::array();
        for (const auto& e : p.evidence) {
            json w = nullptr;
            if (e.witness) {
                const ObligationResult* r = an.find(e.obligation);
                if (r != nullptr) w = witness_json(*e.witness, r->ob);
            }
            evidence.push_back({{"kind", std::string(to_string(e.kind))},
                                {"obligation", e.obligation.empty() ? json(nullptr) : json(e.obligation)},
                                {"assertion", e.assertion},
                                {"label", e.label},
                                {"witness", w},
                                {"model", e.model.empty() ? json(nullptr) : json(e.model)}});
        }
        conflicts.push_back({{"pair", {p.first, p.second}}, {"evidence", evidence}});
    }
    doc["conflicts"] = conflicts;
    doc["token_system"] = tokens_json(ts);

    const int code = check_exit_code(an, rel);
    doc["summary"] = {{"operations", spec.op_count()},
                      {"obligations", an.results.size()},
                      {"skipped", an.skipped.size()},
                      {"conflicts", rel.pairs.size()},
                      {"undeclared_conflicts", undeclared_conflicts(rel)},
                      {"exit_code", code}};
    return doc;
}

std::string report_text(const Analysis& an, const ConflictRelation& rel, const TokenSystem& ts,
                        const ReportMeta& meta, bool listings) {
    const TypedSpec& spec = *an.spec;
    const Bounds& b = an.options.bounds;
    std::ostringstream out;
    out << "spec " << meta.spec_path;
    if (spec.ast.module_name) out << " (module " << *spec.ast.module_name << ")";
    out << "\n  sha256 " << meta.spec_sha256 << '\n';
    out << "bounds: ints [" << b.lo << ", " << b.hi << "], array length " << b.min_len << ".." << b.max_len
        << "; solver: " << (an.options.solver ? *an.options.solver : "none")
        << (an.options.vc.assume_invariant ? "" : "; invariant not assumed") << "\n\n";

    std::size_t w = 9;
    for (const auto& op : spec.ast.operations) w = std::max(w, op.name.size());
    out << "safety\n";
    if (spec.ast.operations.empty()) out << "  (no operations)\n";
    for (const auto& op : spec.ast.operations) {
        const ObligationResult* r = result_for(an, ObligationKind::safety, op.name);
        out << "  " << std::left << std::setw(static_cast<int>(w)) << op.name << "  "
            << std::setw(21) << verdict_word(r->outcome, obligation_proved(*r)) << backend_text(*r) << '\n';
    }

    const auto matrix = pair_matrix(an);
    std::size_t pw = 4;
    for (const auto& e : matrix) pw = std::max(pw, e.first.size() + e.second.size() + 3);
    out << "\npairs\n";
    out << "  " << std::left << std::setw(static_cast<int>(pw)) << "pair" << "  " << std::setw(14) << "commutativity"
        << std::setw(14) << "stability" << "backend\n";
    for (const auto& e : matrix) {
        const std::string name = e.first + " / " + e.second;
        out << "  " << std::left << std::setw(static_cast<int>(pw)) << name << "  ";
        if (e.skipped) {
            out << "declared conflict, not analyzed\n";
            continue;
        }
        const ObligationResult* r = an.find(e.obligation);
        out << std::setw(14) << cell(e.commutes) << std::setw(14) << cell(e.stable) << backend_text(*r) << '\n';
    }

    out << "\nfailures\n";
    bool any = false;
    for (const auto& r : an.results) {
        for (const auto& a : r.assertions) {
            if (a.outcome == Outcome::holds && !a.disagreement) continue;
            any = true;
            out << "  " << r.ob.id << ": " << a.label << ' ' << to_string(a.outcome);
            if (a.witness) out << " at " << describe(a.witness->valuation, r.ob);
            else if (!a.model.empty()) out << " (solver counter-model only)";
            if (a.disagreement) out << " [solver proved it: engines disagree]";
            out << '\n';
        }
        if (!r.solver_error.empty()) {
            any = true;
            out << "  " << r.ob.id << ": solver error: " << r.solver_error << '\n';
        }
    }
    if (!any) out << "  (none)\n";

    out << "\nconflicts\n";
    if (rel.pairs.empty()) out << "  (none)\n";
    for (const auto& p : rel.pairs) {
        out << "  " << p.first << " / " << p.second << ':';
        for (std::size_t i = 0; i < p.evidence.size(); ++i) {
            const Evidence& e = p.evidence[i];
            out << (i == 0 ? " " : "; ") << to_string(e.kind);
            if (!e.obligation.empty()) out << " (" << e.obligation << ", " << e.label << ")";
        }
        out << '\n';
    }
    out << '\n';
    tokens_text(out, ts);

    if (listings) {
        out << "\nobligations\n";
        for (const auto& r : an.results) out << '\n' << print_obligation(r.ob);
    }

    const int code = check_exit_code(an, rel);
    out << "\nresult: ";
    if (code == 1) out << undeclared_conflicts(rel) << " conflicting pair(s) need synchronization\n";
    else if (code == 2) out << "inconclusive\n";
    else out << "no conflicts beyond declared ones\n";
    return out.str();
}

nlohmann::json trace_json(const RunTrace& t, const TypedSpec& spec) {
    const StateDecl& decl = spec.ast.state;
    json ops = json::array();
    for (const auto& o : t.ops) {
        const auto& d = spec.op(o.op);
        json args = json::object();
        for (std::size_t p = 0; p < d.params.size(); ++p) {
            if (static_cast<int>(p) == d.state_param) continue;
            args[d.params[p].name] = d.params[p].type.kind == Type::boolean ? json(o.args[p] != 0) : json(o.args[p]);
        }
        ops.push_back({{"id", o.id},
                       {"operation", d.name},
                       {"origin", o.origin},
                       {"args", args},
                       {"text", d.name + "(" + args_text(o, spec) + ")"},
                       {"seen", o.seen}});
    }
    json events = json::array();
    for (const auto& e : t.events) {
        json ev = {{"kind", std::string(to_string(e.kind))}, {"replica", e.replica}};
        switch (e.kind) {
            case SimEvent::Kind::defer:
                ev["blocked_by"] = e.op;
                ev["operation"] = spec.op(e.other).name;
                break;
            case SimEvent::Kind::divergence:
                ev["other_replica"] = e.other;
                ev["state"] = state_json(e.state, decl);
                break;
            case SimEvent::Kind::invariant:
                ev["state"] = state_json(e.state, decl);
                break;
            default:
                ev["op"] = e.op;
                ev["state"] = state_json(e.state, decl);
                break;
        }
        events.push_back(std::move(ev));
    }
    json finals = json::array();
    for (const auto& s : t.final_states) finals.push_back(state_json(s, decl));
    return {{"run", t.run},
            {"seed", t.seed},
            {"delivery", std::string(to_string(t.delivery))},
            {"replicas", t.replicas},
            {"initial", state_json(t.initial, decl)},
            {"ops", ops},
            {"events", events},
            {"final_states", finals},
            {"log", lines_of(format_run(t, spec))}};
}

nlohmann::json sim_json(const std::vector<SimReport>& reports, const TypedSpec& spec, const TokenSystem& ts,
                        const ReportMeta& meta) {
    json doc = meta_json(meta, spec);
    json runs = json::array();
    bool ok = true;
    for (const auto& r : reports) {
        const SimConfig& c = r.config;
        json failures = json::array();
        for (const auto& f : r.failures) {
            failures.push_back({{"run", f.run}, {"trace", trace_json(f.trace, spec)},
                                {"minimized", trace_json(f.minimized, spec)}});
        }
        ok = ok && r.failed_runs == 0;
        runs.push_back({{"config",
                         {{"replicas", c.replicas},
                          {"ops_per_run", c.ops_per_run},
                          {"runs", c.runs},
                          {"seed", c.seed},
                          {"delivery", std::string(to_string(c.delivery))},
                          {"enforce_tokens", c.enforce_tokens},
                          {"bounds", bounds_json(c.bounds)}}},
                        {"runs", r.runs},
                        {"failed_runs", r.failed_runs},
                        {"invariant_violations", r.invariant_violations},
                        {"divergences", r.divergences},
                        {"stability_events", r.stability_events},
                        {"faults", r.faults},
                        {"deferrals", r.deferrals},
                        {"operations", r.operations},
                        {"failures", failures}});
    }
    doc["token_system"] = tokens_json(ts);
    doc["simulations"] = runs;
    doc["summary"] = {{"violations", !ok}, {"exit_code", ok ? 0 : 1}};
    return doc;
}

std::string sim_text(const std::vector<SimReport>& reports, const TypedSpec& spec, const TokenSystem& ts,
                     const ReportMeta& meta) {
    std::ostringstream out;
    out << "spec " << meta.spec_path << "\n  sha256 " << meta.spec_sha256 << "\n\n";
    tokens_text(out, ts);
    for (const auto& r : reports) {
        const SimConfig& c = r.config;
        out << "\nsimulation: " << to_string(c.delivery) << " delivery, " << c.replicas << " replicas, " << c.runs
            << " runs of " << c.ops_per_run << " ops, seed " << c.seed
            << (c.enforce_tokens ? ", tokens enforced" : ", tokens off") << '\n';
        out << "  failed runs           " << r.failed_runs << '\n'
            << "  invariant violations  " << r.invariant_violations << '\n'
            << "  divergences           " << r.divergences << '\n'
            << "  stability events      " << r.stability_events << '\n'
            << "  body faults           " << r.faults << '\n'
            << "  deferrals             " << r.deferrals << '\n'
            << "  operations            " << r.operations << '\n';
        if (!r.failures.empty()) {
            const Failure& f = r.failures.front();
            out << "\n  first failure, minimized (replay with --seed " << c.seed << ", run " << f.run << "):\n";
            for (const auto& line : lines_of(format_run(f.minimized, spec))) out << "  " << line << '\n';
        }
    }
    const bool ok = std::all_of(reports.begin(), reports.end(), [](const SimReport& r) { return r.failed_runs == 0; });
    out << "\nresult: " << (ok ? "no violations" : "violations found") << '\n';
    return out.str();
}

}  // namespace cise
