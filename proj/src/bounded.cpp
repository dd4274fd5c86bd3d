#include <cise/bounded.hpp>

#include <chrono>
#include <functional>
#include <sstream>

namespace cise {

namespace {

struct Exhausted {};

std::vector<Int> call_args(const Obligation& ob, const Call& c, const std::vector<Int>& scalars) {
    std::vector<Int> args(c.args.size(), 0);
    for (std::size_t p = 0; p < c.args.size(); ++p) {
        if (c.args[p] >= 0) args[p] = scalars[static_cast<std::size_t>(c.args[p])];
    }
    (void)ob;
    return args;
}

std::vector<const ConcreteState*> pointers(const std::vector<ConcreteState>& states) {
    std::vector<const ConcreteState*> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(&s);
    return out;
}

struct LeafResult {
    int failed = -1;
    Fault fault;
    int fault_call = -1;
};

// Runs calls in order, stopping at the first failing assertion.
LeafResult run_leaf(const Obligation& ob, const Valuation& v) {
    LeafResult r;
    std::vector<ConcreteState> current = v.states;
    const auto cur_ptrs = pointers(current);
    const auto init_ptrs = pointers(v.states);
    const Frame frame{v.scalars, cur_ptrs, init_ptrs, nullptr};
    const int n = static_cast<int>(ob.calls.size());
    for (int c = 0; c <= n; ++c) {
        for (int a = 0; a < static_cast<int>(ob.assertions.size()); ++a) {
            const Assertion& as = ob.assertions[static_cast<std::size_t>(a)];
            if (as.role == AssertionRole::memory_safety) continue;
            const bool here = c < n ? as.before_call == c : as.before_call < 0;
            if (!here) continue;
            if (eval_truth(as.formula, frame) != Truth::yes) {
                r.failed = a;
                return r;
            }
        }
        if (c == n) break;
        const Call& call = ob.calls[static_cast<std::size_t>(c)];
        const auto args = call_args(ob, call, v.scalars);
        if (Fault f = exec_in_place(ob.spec->op(call.op), args, current[static_cast<std::size_t>(call.state)])) {
            r.failed = ob.memory_safety_index();
            r.fault = f;
            r.fault_call = c;
            return r;
        }
    }
    return r;
}

class Enumerator {
public:
    Enumerator(const Obligation& ob, const Bounds& b) : ob_(ob), b_(b), decl_(ob.spec->ast.state) {
        val_.scalars.assign(ob.scalars.size(), 0);
        val_.states.assign(ob.states.size(), zero_state(decl_));
        know_.assign(ob.states.size(), Knowledge{0, -1});
        settled_.assign(ob.assumptions.size(), false);
        verdict_.assertions.resize(ob.assertions.size());
        verdict_.bounds = b;
        remaining_ = static_cast<int>(ob.assertions.size());
        ptrs_ = pointers(val_.states);
    }

    Verdict run() {
        const auto t0 = std::chrono::steady_clock::now();
        bool exhausted = false;
        try {
            if (admit()) state_field(0, 0);
        } catch (const Exhausted&) {
            exhausted = true;
        } catch (const Done&) {
        }
        verdict_.stats.nodes = nodes_;
        verdict_.stats.models = models_;
        verdict_.stats.elapsed_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        for (auto& a : verdict_.assertions) {
            if (a.status != AssertionStatus::fails && exhausted) a.status = AssertionStatus::undetermined;
        }
        if (verdict_.witness) {
            verdict_.status = VerdictStatus::counterexample;
        } else if (exhausted) {
            verdict_.status = VerdictStatus::resource_exhausted;
        } else {
            verdict_.status = VerdictStatus::valid_within_bounds;
        }
        return std::move(verdict_);
    }

private:
    struct Done {};

    void tick() {
        if (++nodes_ > b_.max_nodes) throw Exhausted{};
    }

    // Evaluates unsettled assumptions on the current partial valuation.
    // Newly settled conjuncts are appended to `newly` so the caller can undo.
    bool admit(std::vector<int>* newly = nullptr) {
        const PartialView view{know_, scalars_known_};
        const Frame frame{val_.scalars, ptrs_, ptrs_, &view};
        for (std::size_t c = 0; c < ob_.assumptions.size(); ++c) {
            if (settled_[c]) continue;
            const Truth t = eval_truth(ob_.assumptions[c], frame);
            if (t == Truth::no || t == Truth::fault) return false;
            if (t == Truth::yes) {
                settled_[c] = true;
                if (newly != nullptr) newly->push_back(static_cast<int>(c));
            }
        }
        return true;
    }

    template <class F>
    void branch(F&& descend) {
        std::vector<int> newly;
        tick();
        if (admit(&newly)) descend();
        for (int c : newly) settled_[static_cast<std::size_t>(c)] = false;
    }

    void state_field(std::size_t s, std::size_t f) {
        if (s == ob_.states.size()) {
            scalar(0);
            return;
        }
        if (f == decl_.fields.size()) {
            state_field(s + 1, 0);
            return;
        }
        Value& slot = val_.states[s].fields[f];
        Knowledge& k = know_[s];
        switch (decl_.fields[f].type.kind) {
            case Type::boolean:
                for (int v = 0; v <= 1; ++v) {
                    slot = v == 1;
                    k = {static_cast<int>(f) + 1, -1};
                    branch([&] { state_field(s, f + 1); });
                }
                break;
            case Type::int_array:
                for (int len = b_.min_len; len <= b_.max_len; ++len) {
                    std::get<IntArray>(slot).assign(static_cast<std::size_t>(len), b_.lo);
                    k = {static_cast<int>(f), 0};
                    branch([&] { cells(s, f, 0); });
                }
                std::get<IntArray>(slot).clear();
                break;
            default:
                for (Int v = b_.lo; v <= b_.hi; ++v) {
                    slot = v;
                    k = {static_cast<int>(f) + 1, -1};
                    branch([&] { state_field(s, f + 1); });
                }
                break;
        }
        slot = zero_state(decl_).fields[f];
        k = {static_cast<int>(f), -1};
    }

    void cells(std::size_t s, std::size_t f, std::size_t i) {
        auto& arr = std::get<IntArray>(val_.states[s].fields[f]);
        if (i == arr.size()) {
            know_[s] = {static_cast<int>(f) + 1, -1};
            state_field(s, f + 1);
            know_[s] = {static_cast<int>(f), static_cast<int>(i)};
            return;
        }
        for (Int v = b_.lo; v <= b_.hi; ++v) {
            arr[i] = v;
            know_[s] = {static_cast<int>(f), static_cast<int>(i) + 1};
            branch([&] { cells(s, f, i + 1); });
        }
        know_[s] = {static_cast<int>(f), static_cast<int>(i)};
    }

    void scalar(std::size_t i) {
        if (i == ob_.scalars.size()) {
            leaf();
            return;
        }
        const bool is_bool = ob_.scalars[i].type == Type::boolean;
        const Int lo = is_bool ? 0 : b_.lo;
        const Int hi = is_bool ? 1 : b_.hi;
        for (Int v = lo; v <= hi; ++v) {
            val_.scalars[i] = v;
            scalars_known_ = static_cast<int>(i) + 1;
            branch([&] { scalar(i + 1); });
        }
        val_.scalars[i] = 0;
        scalars_known_ = static_cast<int>(i);
    }

    void leaf() {
        // every conjunct is decided once the valuation is complete
        for (bool s : settled_) {
            if (!s) return;
        }
        ++models_;
        const LeafResult r = run_leaf(ob_, val_);
        if (r.failed < 0) return;
        auto& slot = verdict_.assertions[static_cast<std::size_t>(r.failed)];
        if (slot.status == AssertionStatus::fails) return;
        Witness w{val_, r.failed, r.fault, r.fault_call, ob_.spec_hash};
        slot.status = AssertionStatus::fails;
        slot.witness = w;
        if (!verdict_.witness) verdict_.witness = std::move(w);
        if (--remaining_ == 0) throw Done{};
    }

    const Obligation& ob_;
    const Bounds& b_;
    const StateDecl& decl_;
    Valuation val_;
    std::vector<const ConcreteState*> ptrs_;
    std::vector<Knowledge> know_;
    int scalars_known_ = 0;
    std::vector<bool> settled_;
    Verdict verdict_;
    std::uint64_t nodes_ = 0;
    std::uint64_t models_ = 0;
    int remaining_ = 0;
};

std::string state_list(const std::vector<ConcreteState>& states, const Obligation& ob) {
    std::string out;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (i != 0) out += ", ";
        out += ob.states[i] + " = " + to_string(states[i], ob.spec->ast.state);
    }
    return out;
}

Env op_env(const Obligation& ob, const Call& c, const Valuation& v, const ConcreteState* pre) {
    const auto& decl = ob.spec->op(c.op);
    Env env;
    env.pre_state = pre;
    for (std::size_t p = 0; p < decl.params.size(); ++p) {
        const int sym = c.args[p];
        if (sym < 0) {
            env.params.emplace_back(Int{0});
        } else if (decl.params[p].type.kind == Type::boolean) {
            env.params.emplace_back(v.scalars[static_cast<std::size_t>(sym)] != 0);
        } else {
            env.params.emplace_back(v.scalars[static_cast<std::size_t>(sym)]);
        }
    }
    return env;
}

}  // namespace

void validate(const Bounds& b) {
    if (b.lo > 0 || b.hi < 0) throw std::invalid_argument("bounds must satisfy lo <= 0 <= hi");
    if (b.min_len < 0 || b.min_len > b.max_len) {
        throw std::invalid_argument("array length range must satisfy 0 <= min <= max");
    }
}

std::string_view to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::valid_within_bounds: return "valid_within_bounds";
        case VerdictStatus::counterexample:      return "counterexample";
        case VerdictStatus::resource_exhausted:  return "resource_exhausted";
    }
    return "?";
}

std::string_view to_string(AssertionStatus s) {
    switch (s) {
        case AssertionStatus::holds_within_bounds: return "holds_within_bounds";
        case AssertionStatus::fails:               return "fails";
        case AssertionStatus::undetermined:        return "undetermined";
    }
    return "?";
}

std::string describe(const Valuation& v, const Obligation& ob) {
    std::string out;
    for (std::size_t i = 0; i < v.scalars.size(); ++i) {
        if (!out.empty()) out += ", ";
        const bool b = ob.scalars[i].type == Type::boolean;
        out += ob.scalars[i].name + " = " + (b ? (v.scalars[i] != 0 ? "true" : "false") : std::to_string(v.scalars[i]));
    }
    const std::string states = state_list(v.states, ob);
    if (!states.empty()) out += (out.empty() ? "" : ", ") + states;
    return out;
}

Verdict check(const Obligation& ob, const Bounds& b) {
    validate(b);
    return Enumerator(ob, b).run();
}

Execution execute(const Obligation& ob, const Valuation& v) {
    Execution ex;
    ex.assertions.assign(ob.assertions.size(), Truth::yes);
    std::vector<ConcreteState> current = v.states;
    const auto cur_ptrs = pointers(current);
    const auto init_ptrs = pointers(v.states);
    const Frame frame{v.scalars, cur_ptrs, init_ptrs, nullptr};
    Truth acc = Truth::yes;
    for (const auto& a : ob.assumptions) {
        const Truth t = eval_truth(a, frame);
        if (t == Truth::no) {
            acc = Truth::no;
        } else if (t == Truth::fault && acc == Truth::yes) {
            acc = Truth::fault;
        }
    }
    ex.assumptions = acc;
    const int n = static_cast<int>(ob.calls.size());
    for (int c = 0; c <= n; ++c) {
        for (std::size_t a = 0; a < ob.assertions.size(); ++a) {
            const Assertion& as = ob.assertions[a];
            if (as.role == AssertionRole::memory_safety) continue;
            const bool here = c < n ? as.before_call == c : as.before_call < 0;
            if (!here) continue;
            ex.assertions[a] = ex.fault ? Truth::fault : eval_truth(as.formula, frame);
        }
        if (c == n || ex.fault) continue;
        const Call& call = ob.calls[static_cast<std::size_t>(c)];
        const auto args = call_args(ob, call, v.scalars);
        if (Fault f = exec_in_place(ob.spec->op(call.op), args, current[static_cast<std::size_t>(call.state)])) {
            ex.fault = f;
            ex.fault_call = c;
        }
    }
    ex.assertions[static_cast<std::size_t>(ob.memory_safety_index())] = ex.fault ? Truth::no : Truth::yes;
    ex.final_states = current;
    return ex;
}

Trace replay(const Witness& w, const Obligation& ob) {
    if (w.spec_hash != ob.spec_hash || w.spec_hash != ob.spec->fingerprint) {
        throw StaleWitness("witness was produced for a different specification (hash " +
                           w.spec_hash.substr(0, 12) + ", current " + ob.spec->fingerprint.substr(0, 12) + ")");
    }
    const TypedSpec& spec = *ob.spec;
    const Valuation& v = w.valuation;
    Trace t;
    std::vector<ConcreteState> current = v.states;
    t.events.push_back({TraceEvent::Kind::start, -1, true, describe(v, ob), current});

    const EqualityPredicate eq = state_equality(spec);
    auto check_assertion = [&](int a) -> bool {
        const Assertion& as = ob.assertions[static_cast<std::size_t>(a)];
        bool ok = true;
        try {
            switch (as.role) {
                case AssertionRole::precondition: {
                    const Call& c = ob.calls[static_cast<std::size_t>(as.before_call)];
                    const auto& op = spec.op(c.op);
                    ok = holds(conjoin(op.requires_clauses), op_env(ob, c, v, nullptr),
                               current[static_cast<std::size_t>(c.state)]);
                    break;
                }
                case AssertionRole::postcondition: {
                    const Call& c = ob.calls.back();
                    const auto& op = spec.op(c.op);
                    const auto st = static_cast<std::size_t>(c.state);
                    ok = holds(conjoin(op.ensures_clauses), op_env(ob, c, v, &v.states[st]), current[st]);
                    break;
                }
                case AssertionRole::invariant:
                    ok = !spec.ast.state.invariant ||
                         holds(*spec.ast.state.invariant, Env{},
                               current[static_cast<std::size_t>(ob.calls.back().state)]);
                    break;
                case AssertionRole::state_equality: {
                    const ConcreteState* two[2] = {&current[0], &current[1]};
                    Fault f;
                    const Truth r = eval_truth(eq.body, Frame{{}, two, two, nullptr}, &f);
                    if (r == Truth::fault) throw EvalError(f);
                    ok = r == Truth::yes;
                    break;
                }
                case AssertionRole::trivial:
                case AssertionRole::memory_safety:
                    ok = true;
                    break;
            }
        } catch (const EvalError&) {
            ok = false;
        }
        t.events.push_back({TraceEvent::Kind::check, a, ok,
                            std::string(ok ? "holds: " : "FAILS: ") + as.label, current});
        return ok;
    };

    const int n = static_cast<int>(ob.calls.size());
    for (int c = 0; c <= n && t.failed_assertion < 0; ++c) {
        for (int a = 0; a < static_cast<int>(ob.assertions.size()); ++a) {
            const Assertion& as = ob.assertions[static_cast<std::size_t>(a)];
            if (as.role == AssertionRole::memory_safety) continue;
            const bool here = c < n ? as.before_call == c : as.before_call < 0;
            if (here && !check_assertion(a)) {
                t.failed_assertion = a;
                break;
            }
        }
        if (c == n || t.failed_assertion >= 0) break;
        const Call& call = ob.calls[static_cast<std::size_t>(c)];
        const auto& op = spec.op(call.op);
        auto& st = current[static_cast<std::size_t>(call.state)];
        std::ostringstream text;
        text << op.name;
        for (std::size_t p = 0; p < op.params.size(); ++p) {
            text << ' ' << (call.args[p] < 0 ? ob.states[static_cast<std::size_t>(call.state)]
                                             : ob.scalars[static_cast<std::size_t>(call.args[p])].name);
        }
        try {
            st = exec_body(op, op_env(ob, call, v, nullptr), st);
            t.events.push_back({TraceEvent::Kind::call, c, true, text.str(), current});
        } catch (const EvalError& e) {
            t.events.push_back({TraceEvent::Kind::fault, c, false, text.str() + ": " + e.what(), current});
            t.failed_assertion = ob.memory_safety_index();
        }
    }
    t.reproduced = t.failed_assertion == w.assertion;
    return t;
}

Trace replay(const Verdict& v, const Obligation& ob) {
    if (v.status != VerdictStatus::counterexample || !v.witness) {
        throw NoWitness("verdict " + std::string(to_string(v.status)) + " has no witness to replay");
    }
    return replay(*v.witness, ob);
}

std::string format_trace(const Trace& t) {
    std::ostringstream out;
    for (const auto& e : t.events) {
        switch (e.kind) {
            case TraceEvent::Kind::start: out << "initial: " << e.text << '\n'; break;
            case TraceEvent::Kind::call:  out << "call " << e.index + 1 << ": " << e.text << '\n'; break;
            case TraceEvent::Kind::check: out << "  " << e.text << '\n'; break;
            case TraceEvent::Kind::fault: out << "call " << e.index + 1 << " faults: " << e.text << '\n'; break;
        }
    }
    return out.str();
}

std::vector<ConcreteState> satisfying_states(const StateDecl& decl, const Bounds& b, const Expr* filter,
                                             std::size_t limit) {
    validate(b);
    // A one-state pseudo obligation reuses the pruned enumeration.
    std::vector<ConcreteState> out;
    std::vector<Knowledge> know(1, Knowledge{0, -1});
    ConcreteState s = zero_state(decl);
    const ConcreteState* ptr[1] = {&s};

    auto ok = [&]() {
        if (filter == nullptr) return true;
        const PartialView view{know, 0};
        const Truth t = eval_truth(*filter, Frame{{}, ptr, ptr, &view});
        return t != Truth::no && t != Truth::fault;
    };

    struct Stop {};
    std::function<void(std::size_t)> field;
    std::function<void(std::size_t, std::size_t)> cell;
    field = [&](std::size_t f) {
        if (f == decl.fields.size()) {
            if (filter != nullptr && eval_truth(*filter, Frame{{}, ptr, ptr, nullptr}) != Truth::yes) return;
            out.push_back(s);
            if (out.size() >= limit) throw Stop{};
            return;
        }
        Value& slot = s.fields[f];
        switch (decl.fields[f].type.kind) {
            case Type::boolean:
                for (int v = 0; v <= 1; ++v) {
                    slot = v == 1;
                    know[0] = {static_cast<int>(f) + 1, -1};
                    if (ok()) field(f + 1);
                }
                break;
            case Type::int_array:
                for (int len = b.min_len; len <= b.max_len; ++len) {
                    std::get<IntArray>(slot).assign(static_cast<std::size_t>(len), b.lo);
                    know[0] = {static_cast<int>(f), 0};
                    if (ok()) cell(f, 0);
                }
                break;
            default:
                for (Int v = b.lo; v <= b.hi; ++v) {
                    slot = v;
                    know[0] = {static_cast<int>(f) + 1, -1};
                    if (ok()) field(f + 1);
                }
                break;
        }
        slot = zero_state(decl).fields[f];
        know[0] = {static_cast<int>(f), -1};
    };
    cell = [&](std::size_t f, std::size_t i) {
        auto& arr = std::get<IntArray>(s.fields[f]);
        if (i == arr.size()) {
            know[0] = {static_cast<int>(f) + 1, -1};
            if (ok()) field(f + 1);
            return;
        }
        for (Int v = b.lo; v <= b.hi; ++v) {
            arr[i] = v;
            know[0] = {static_cast<int>(f), static_cast<int>(i) + 1};
            if (ok()) cell(f, i + 1);
        }
    };
    try {
        field(0);
    } catch (const Stop&) {
    }
    return out;
}

}  // namespace cise
