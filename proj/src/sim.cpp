#include <cise/sim.hpp>

#include <sstream>

namespace cise {

namespace {

constexpr int kArgTries = 64;
constexpr std::size_t kInitialStateCap = 1u << 16;

Expr typed_conjunction(const std::vector<Expr>& parts) {
    Expr e = conjoin(parts);
    e.type = Type::boolean;
    return e;
}

bool truth_of(const Expr& f, std::span<const Int> scalars, std::initializer_list<const ConcreteState*> states) {
    const std::vector<const ConcreteState*> ptrs(states);
    const Frame frame{scalars, ptrs, ptrs, nullptr};
    return eval_truth(f, frame) == Truth::yes;
}

}  // namespace

std::string_view to_string(Delivery d) { return d == Delivery::causal ? "causal" : "arbitrary"; }

std::string_view to_string(SimEvent::Kind k) {
    switch (k) {
        case SimEvent::Kind::issue:      return "issue";
        case SimEvent::Kind::deliver:    return "deliver";
        case SimEvent::Kind::defer:      return "defer";
        case SimEvent::Kind::stability:  return "stability";
        case SimEvent::Kind::fault:      return "fault";
        case SimEvent::Kind::invariant:  return "invariant";
        case SimEvent::Kind::divergence: return "divergence";
    }
    return "?";
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t Draw::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    for (;;) {
        const std::uint64_t x = rng_();
        if (x < limit) return x % n;
    }
}

Int Draw::between(Int lo, Int hi) {
    const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) return static_cast<Int>(rng_());
    return static_cast<Int>(static_cast<std::uint64_t>(lo) + below(span));
}

int RunTrace::count(SimEvent::Kind k) const {
    int n = 0;
    for (const auto& e : events) n += e.kind == k ? 1 : 0;
    return n;
}

bool RunTrace::failed() const {
    return count(SimEvent::Kind::invariant) + count(SimEvent::Kind::divergence) + count(SimEvent::Kind::stability) +
               count(SimEvent::Kind::fault) >
           0;
}

bool concurrent(const RunTrace& t, int a, int b) {
    const SimOp& x = t.ops.at(static_cast<std::size_t>(a));
    const SimOp& y = t.ops.at(static_cast<std::size_t>(b));
    auto saw = [](const SimOp& later, int id) {
        for (int s : later.seen) {
            if (s == id) return true;
        }
        return false;
    };
    return a != b && !saw(x, b) && !saw(y, a);
}

bool overlapping(const RunTrace& t, int a, int b) {
    const SimOp& x = t.ops.at(static_cast<std::size_t>(a));
    const SimOp& y = t.ops.at(static_cast<std::size_t>(b));
    const int x_end = x.completed < 0 ? static_cast<int>(t.events.size()) : x.completed;
    const int y_end = y.completed < 0 ? static_cast<int>(t.events.size()) : y.completed;
    return a != b && x.issued < y_end && y.issued < x_end;
}

Simulator::Simulator(std::shared_ptr<const TypedSpec> spec, TokenSystem tokens, SimConfig cfg)
    : spec_(std::move(spec)), tokens_(std::move(tokens)), cfg_(std::move(cfg)) {
    if (cfg_.replicas < 2) {
        throw ConfigError("at least 2 replicas are needed for concurrency (got " + std::to_string(cfg_.replicas) + ")");
    }
    if (cfg_.ops_per_run < 0) throw ConfigError("operations per run must not be negative");
    try {
        validate(cfg_.bounds);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const StateDecl& decl = spec_->ast.state;
    const Expr* inv = decl.invariant ? &*decl.invariant : nullptr;
    initial_states_ = satisfying_states(decl, cfg_.bounds, inv, kInitialStateCap);
    if (initial_states_.empty()) throw ConfigError("no state within bounds satisfies the invariant");
    for (const auto& op : spec_->ast.operations) requires_.push_back(typed_conjunction(op.requires_clauses));
    equality_ = state_equality(*spec_).body;
}

bool Simulator::requires_hold(int op, const std::vector<Int>& args, const ConcreteState& s) const {
    return truth_of(requires_[static_cast<std::size_t>(op)], args, {&s});
}

void Simulator::finish(RunTrace& t, std::vector<ConcreteState>& states) const {
    const StateDecl& decl = spec_->ast.state;
    const int r = static_cast<int>(states.size());
    if (decl.invariant) {
        for (int q = 0; q < r; ++q) {
            const ConcreteState& s = states[static_cast<std::size_t>(q)];
            if (!truth_of(*decl.invariant, {}, {&s})) t.events.push_back({SimEvent::Kind::invariant, q, -1, -1, s});
        }
    }
    for (int a = 0; a < r; ++a) {
        for (int b = a + 1; b < r; ++b) {
            const ConcreteState& x = states[static_cast<std::size_t>(a)];
            const ConcreteState& y = states[static_cast<std::size_t>(b)];
            if (!truth_of(equality_, {}, {&x, &y})) t.events.push_back({SimEvent::Kind::divergence, a, -1, b, y});
        }
    }
    t.final_states = std::move(states);
}

RunTrace Simulator::run(std::uint64_t index) const {
    Draw draw(splitmix64(splitmix64(cfg_.seed) ^ index));
    const auto& ops = spec_->ast.operations;
    const int R = cfg_.replicas;
    RunTrace t;
    t.run = index;
    t.seed = cfg_.seed;
    t.delivery = cfg_.delivery;
    t.replicas = R;
    t.initial = initial_states_[static_cast<std::size_t>(draw.below(initial_states_.size()))];

    std::vector<ConcreteState> states(static_cast<std::size_t>(R), t.initial);
    std::vector<std::vector<int>> clock(static_cast<std::size_t>(R), std::vector<int>(static_cast<std::size_t>(R), 0));
    std::vector<std::vector<int>> applied(static_cast<std::size_t>(R));
    std::vector<std::vector<int>> op_clock;
    std::vector<int> remaining;
    struct Msg {
        int op;
        int target;
    };
    std::vector<Msg> pending;

    auto deliverable = [&](const Msg& m) {
        if (cfg_.delivery == Delivery::arbitrary) return true;
        const auto& c = op_clock[static_cast<std::size_t>(m.op)];
        const auto& v = clock[static_cast<std::size_t>(m.target)];
        const int o = t.ops[static_cast<std::size_t>(m.op)].origin;
        for (int k = 0; k < R; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (k == o ? v[ku] != c[ku] - 1 : v[ku] < c[ku]) return false;
        }
        return true;
    };

    int attempts = 0;
    for (;;) {
        const bool can_issue = attempts < cfg_.ops_per_run && !ops.empty();
        if (!can_issue && pending.empty()) break;
        bool issue = can_issue && (pending.empty() || draw.coin());
        if (issue) {
            const int r = static_cast<int>(draw.below(static_cast<std::uint64_t>(R)));
            const int op = static_cast<int>(draw.below(ops.size()));
            int blocker = -1;
            if (cfg_.enforce_tokens) {
                for (const auto& o : t.ops) {
                    if (o.completed < 0 && tokens_.excludes(ops[static_cast<std::size_t>(op)].name,
                                                            ops[static_cast<std::size_t>(o.op)].name)) {
                        blocker = o.id;
                        break;
                    }
                }
            }
            if (blocker >= 0) {
                t.events.push_back({SimEvent::Kind::defer, r, blocker, op, {}});
                issue = false;  // deliver instead, which eventually releases the token
            } else {
                ++attempts;
                const auto& decl = ops[static_cast<std::size_t>(op)];
                std::vector<Int> args(decl.params.size(), 0);
                bool found = false;
                for (int k = 0; k < kArgTries && !found; ++k) {
                    for (std::size_t p = 0; p < decl.params.size(); ++p) {
                        if (static_cast<int>(p) == decl.state_param) continue;
                        args[p] = decl.params[p].type.kind == Type::boolean
                                      ? (draw.coin() ? 1 : 0)
                                      : draw.between(cfg_.bounds.lo, cfg_.bounds.hi);
                    }
                    found = requires_hold(op, args, states[static_cast<std::size_t>(r)]);
                }
                if (!found) continue;
                const int id = static_cast<int>(t.ops.size());
                const auto ru = static_cast<std::size_t>(r);
                t.ops.push_back(SimOp{id, op, r, args, -1, -1, applied[ru]});
                ConcreteState next = states[ru];
                const Fault f = exec_in_place(decl, args, next);
                if (f) t.events.push_back({SimEvent::Kind::fault, r, id, -1, states[ru]});
                t.ops.back().issued = static_cast<int>(t.events.size());
                if (!f) states[ru] = std::move(next);
                t.events.push_back({SimEvent::Kind::issue, r, id, -1, states[ru]});
                if (f) {
                    // aborted at the origin: nothing to ship, and no later op depends on it
                    op_clock.push_back(clock[ru]);
                    remaining.push_back(0);
                    t.ops.back().completed = t.ops.back().issued;
                    continue;
                }
                applied[ru].push_back(id);
                ++clock[ru][ru];
                op_clock.push_back(clock[ru]);
                remaining.push_back(R - 1);
                for (int q = 0; q < R; ++q) {
                    if (q != r) pending.push_back({id, q});
                }
                continue;
            }
        }
        if (pending.empty()) continue;
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            if (deliverable(pending[i])) candidates.push_back(i);
        }
        if (candidates.empty()) throw std::logic_error("causal delivery stalled with messages pending");
        const std::size_t pick = candidates[static_cast<std::size_t>(draw.below(candidates.size()))];
        const Msg m = pending[pick];
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(pick));
        SimOp& o = t.ops[static_cast<std::size_t>(m.op)];
        const auto qu = static_cast<std::size_t>(m.target);
        if (!requires_hold(o.op, o.args, states[qu])) {
            t.events.push_back({SimEvent::Kind::stability, m.target, o.id, -1, states[qu]});
        }
        ConcreteState next = states[qu];
        const Fault f = exec_in_place(ops[static_cast<std::size_t>(o.op)], o.args, next);
        if (f) {
            t.events.push_back({SimEvent::Kind::fault, m.target, o.id, -1, states[qu]});
        } else {
            states[qu] = std::move(next);
        }
        t.events.push_back({SimEvent::Kind::deliver, m.target, o.id, -1, states[qu]});
        applied[qu].push_back(o.id);
        ++clock[qu][static_cast<std::size_t>(o.origin)];
        if (--remaining[static_cast<std::size_t>(o.id)] == 0) o.completed = static_cast<int>(t.events.size()) - 1;
    }
    finish(t, states);
    return t;
}

RunTrace Simulator::execute(const RunTrace& base, const std::vector<Action>& schedule,
                            const std::vector<bool>& removed, bool& valid) const {
    const auto& ops = spec_->ast.operations;
    valid = true;
    RunTrace t;
    t.run = base.run;
    t.seed = base.seed;
    t.delivery = base.delivery;
    t.replicas = base.replicas;
    t.initial = base.initial;
    std::vector<ConcreteState> states(static_cast<std::size_t>(base.replicas), base.initial);
    std::vector<std::vector<int>> applied(static_cast<std::size_t>(base.replicas));
    std::vector<int> renumber(base.ops.size(), -1);
    std::vector<int> remaining;
    for (const Action& a : schedule) {
        if (removed[static_cast<std::size_t>(a.op)]) continue;
        const SimOp& src = base.ops[static_cast<std::size_t>(a.op)];
        const auto& decl = ops[static_cast<std::size_t>(src.op)];
        if (a.issue) {
            const auto ru = static_cast<std::size_t>(src.origin);
            if (!requires_hold(src.op, src.args, states[ru])) {
                valid = false;
                return t;
            }
            const int id = static_cast<int>(t.ops.size());
            renumber[static_cast<std::size_t>(a.op)] = id;
            t.ops.push_back(SimOp{id, src.op, src.origin, src.args, -1, -1, applied[ru]});
            ConcreteState next = states[ru];
            const Fault f = exec_in_place(decl, src.args, next);
            if (f) t.events.push_back({SimEvent::Kind::fault, src.origin, id, -1, states[ru]});
            t.ops.back().issued = static_cast<int>(t.events.size());
            if (!f) states[ru] = std::move(next);
            t.events.push_back({SimEvent::Kind::issue, src.origin, id, -1, states[ru]});
            if (!f) applied[ru].push_back(id);
            remaining.push_back(f ? 0 : base.replicas - 1);
            if (f) t.ops.back().completed = t.ops.back().issued;
            continue;
        }
        const int id = renumber[static_cast<std::size_t>(a.op)];
        const auto qu = static_cast<std::size_t>(a.target);
        if (!requires_hold(src.op, src.args, states[qu])) {
            t.events.push_back({SimEvent::Kind::stability, a.target, id, -1, states[qu]});
        }
        ConcreteState next = states[qu];
        const Fault f = exec_in_place(decl, src.args, next);
        if (f) {
            t.events.push_back({SimEvent::Kind::fault, a.target, id, -1, states[qu]});
        } else {
            states[qu] = std::move(next);
        }
        t.events.push_back({SimEvent::Kind::deliver, a.target, id, -1, states[qu]});
        applied[qu].push_back(id);
        if (--remaining[static_cast<std::size_t>(id)] == 0) {
            t.ops[static_cast<std::size_t>(id)].completed = static_cast<int>(t.events.size()) - 1;
        }
    }
    finish(t, states);
    return t;
}

RunTrace Simulator::minimize(const RunTrace& t) const {
    static constexpr SimEvent::Kind order[] = {SimEvent::Kind::invariant, SimEvent::Kind::divergence,
                                               SimEvent::Kind::stability, SimEvent::Kind::fault};
    SimEvent::Kind target = SimEvent::Kind::issue;
    for (auto k : order) {
        if (t.count(k) > 0) {
            target = k;
            break;
        }
    }
    if (target == SimEvent::Kind::issue) return t;
    std::vector<Action> schedule;
    for (const auto& e : t.events) {
        if (e.kind == SimEvent::Kind::issue) schedule.push_back({true, e.op, -1});
        if (e.kind == SimEvent::Kind::deliver) schedule.push_back({false, e.op, e.replica});
    }
    std::vector<bool> removed(t.ops.size(), false);
    bool valid = true;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < t.ops.size(); ++i) {
            if (removed[i]) continue;
            removed[i] = true;
            const RunTrace r = execute(t, schedule, removed, valid);
            if (valid && r.count(target) > 0) {
                changed = true;
            } else {
                removed[i] = false;
            }
        }
    }
    return execute(t, schedule, removed, valid);
}

SimReport Simulator::run_all() const {
    SimReport rep;
    rep.config = cfg_;
    rep.spec_hash = spec_->fingerprint;
    for (std::uint64_t i = 0; i < cfg_.runs; ++i) {
        RunTrace t = run(i);
        ++rep.runs;
        rep.operations += t.ops.size();
        rep.invariant_violations += static_cast<std::uint64_t>(t.count(SimEvent::Kind::invariant));
        rep.divergences += static_cast<std::uint64_t>(t.count(SimEvent::Kind::divergence));
        rep.stability_events += static_cast<std::uint64_t>(t.count(SimEvent::Kind::stability));
        rep.faults += static_cast<std::uint64_t>(t.count(SimEvent::Kind::fault));
        rep.deferrals += static_cast<std::uint64_t>(t.count(SimEvent::Kind::defer));
        if (!t.failed()) continue;
        ++rep.failed_runs;
        if (rep.failures.size() < cfg_.keep_failures) {
            RunTrace m = minimize(t);
            rep.failures.push_back(Failure{i, std::move(t), std::move(m)});
        }
    }
    return rep;
}

RunTrace Simulator::replay(const Failure& f) const {
    if (f.trace.seed != cfg_.seed) {
        throw ConfigMismatch("failure was recorded with seed " + std::to_string(f.trace.seed) + ", not " +
                             std::to_string(cfg_.seed));
    }
    if (f.trace.delivery != cfg_.delivery || f.trace.replicas != cfg_.replicas) {
        throw ConfigMismatch("failure was recorded with " + std::to_string(f.trace.replicas) + " replicas and " +
                             std::string(to_string(f.trace.delivery)) + " delivery");
    }
    RunTrace t = run(f.run);
    if (!(t == f.trace)) throw ConfigMismatch("run " + std::to_string(f.run) + " no longer reproduces the recorded trace");
    return t;
}

std::string format_run(const RunTrace& t, const TypedSpec& spec) {
    const StateDecl& decl = spec.ast.state;
    auto op_text = [&](int id) {
        const SimOp& o = t.ops.at(static_cast<std::size_t>(id));
        const auto& d = spec.op(o.op);
        std::string s = d.name + "#" + std::to_string(id) + "(";
        bool first = true;
        for (std::size_t p = 0; p < d.params.size(); ++p) {
            if (static_cast<int>(p) == d.state_param) continue;
            if (!first) s += ", ";
            first = false;
            s += d.params[p].name + " = ";
            s += d.params[p].type.kind == Type::boolean ? (o.args[p] != 0 ? "true" : "false") : std::to_string(o.args[p]);
        }
        return s + ")";
    };
    std::ostringstream out;
    out << "run " << t.run << " (seed " << t.seed << ", " << to_string(t.delivery) << " delivery, " << t.replicas
        << " replicas)\n";
    out << "  initial " << to_string(t.initial, decl) << '\n';
    for (std::size_t i = 0; i < t.events.size(); ++i) {
        const SimEvent& e = t.events[i];
        out << "  " << i << ": r" << e.replica << ' ';
        switch (e.kind) {
            case SimEvent::Kind::issue:
                out << "issue " << op_text(e.op) << " -> " << to_string(e.state, decl);
                break;
            case SimEvent::Kind::deliver:
                out << "apply " << op_text(e.op) << " from r" << t.ops[static_cast<std::size_t>(e.op)].origin
                    << " -> " << to_string(e.state, decl);
                break;
            case SimEvent::Kind::defer:
                out << "defer " << spec.op(e.other).name << " while " << op_text(e.op) << " is in flight";
                break;
            case SimEvent::Kind::stability:
                out << "precondition of " << op_text(e.op) << " fails at " << to_string(e.state, decl);
                break;
            case SimEvent::Kind::fault:
                out << "body of " << op_text(e.op) << " faults at " << to_string(e.state, decl);
                break;
            case SimEvent::Kind::invariant:
                out << "invariant fails at " << to_string(e.state, decl);
                break;
            case SimEvent::Kind::divergence:
                out << "differs from r" << e.other << ": " << to_string(t.final_states[static_cast<std::size_t>(e.replica)], decl)
                    << " vs " << to_string(e.state, decl);
                break;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace cise
