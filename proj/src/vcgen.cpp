#include <cise/vcgen.hpp>

#include <set>
#include <sstream>

namespace cise {

namespace {

Expr typed(Expr e, Type t) {
    e.type = t;
    return e;
}

Expr state_var(int slot, const std::string& name) {
    Expr e = Expr::var(name);
    e.type = Type::state;
    e.ref = {RefKind::state_var, slot};
    return e;
}

Expr field_of(int slot, const std::string& state_name, const StateDecl& decl, int f) {
    const auto& fd = decl.fields[static_cast<std::size_t>(f)];
    Expr e = Expr::field(state_var(slot, state_name), fd.name);
    e.type = fd.type.kind;
    e.ref = {RefKind::field, f};
    return e;
}

Expr true_lit() { return typed(Expr::bool_lit(true), Type::boolean); }

// Renames and re-resolves an expression from an operation (or invariant, or
// equality predicate) into an obligation's namespace.
struct Subst {
    std::vector<int> params;       // op param index -> scalar symbol
    std::vector<int> state_slots;  // source state slot -> obligation state
    int bare_state = -1;           // invariant: bare fields belong to this obligation state
    const std::vector<Symbol>* scalars = nullptr;
    const std::vector<std::string>* states = nullptr;
    const StateDecl* decl = nullptr;
};

Expr subst(const Expr& e, const Subst& s) {
    if (e.kind == ExprKind::var) {
        switch (e.ref.kind) {
            case RefKind::param: {
                Expr out = e;
                out.ref.index = s.params[static_cast<std::size_t>(e.ref.index)];
                out.name = (*s.scalars)[static_cast<std::size_t>(out.ref.index)].name;
                return out;
            }
            case RefKind::state_var: {
                const int slot = s.state_slots[static_cast<std::size_t>(e.ref.index)];
                return state_var(slot, (*s.states)[static_cast<std::size_t>(slot)]);
            }
            case RefKind::field:
                return field_of(s.bare_state, (*s.states)[static_cast<std::size_t>(s.bare_state)], *s.decl,
                                e.ref.index);
            default:
                return e;
        }
    }
    Expr out = e;
    for (auto& k : out.kids) k = subst(k, s);
    return out;
}

Expr conjunction(std::vector<Expr> parts) {
    Expr e = conjoin(std::move(parts));
    e.type = Type::boolean;
    return e;
}

class Builder {
public:
    Builder(std::shared_ptr<const TypedSpec> spec, ObligationKind kind) : spec_(std::move(spec)) {
        ob_.kind = kind;
        ob_.spec = spec_;
        ob_.spec_hash = spec_->fingerprint;
    }

    // Declares fresh symbols for `op`'s scalar params and its state; returns
    // the state symbol. Names get `suffix` appended and are made unique.
    int declare(int op, const std::string& suffix, std::vector<int>& param_map) {
        const auto& decl = spec_->op(op);
        param_map.assign(decl.params.size(), -1);
        for (std::size_t i = 0; i < decl.params.size(); ++i) {
            if (static_cast<int>(i) == decl.state_param) continue;
            param_map[i] = static_cast<int>(ob_.scalars.size());
            ob_.scalars.push_back(Symbol{fresh(decl.params[i].name + suffix), decl.params[i].type.kind});
        }
        const int st = static_cast<int>(ob_.states.size());
        ob_.states.push_back(fresh(decl.params[static_cast<std::size_t>(decl.state_param)].name + suffix));
        return st;
    }

    // Requires clauses of `op`, instantiated on (param_map, state).
    std::vector<Expr> requires_of(int op, const std::vector<int>& param_map, int state) const {
        const auto& decl = spec_->op(op);
        const Subst s = op_subst(op, param_map, state);
        std::vector<Expr> out;
        for (const auto& r : decl.requires_clauses) out.push_back(subst(r, s));
        return out;
    }

    std::vector<Expr> ensures_of(int op, const std::vector<int>& param_map, int state) const {
        const auto& decl = spec_->op(op);
        const Subst s = op_subst(op, param_map, state);
        std::vector<Expr> out;
        for (const auto& r : decl.ensures_clauses) out.push_back(subst(r, s));
        return out;
    }

    std::optional<Expr> invariant_on(int state) const {
        if (!spec_->ast.state.invariant) return std::nullopt;
        Subst s;
        s.bare_state = state;
        s.scalars = &ob_.scalars;
        s.states = &ob_.states;
        s.decl = &spec_->ast.state;
        return subst(*spec_->ast.state.invariant, s);
    }

    Expr equality(int a, int b) const {
        const EqualityPredicate eq = state_equality(*spec_);
        Subst s;
        s.state_slots = {a, b};
        s.scalars = &ob_.scalars;
        s.states = &ob_.states;
        s.decl = &spec_->ast.state;
        return subst(eq.body, s);
    }

    void assume(std::vector<Expr> conjuncts) {
        for (auto& c : conjuncts) ob_.assumptions.push_back(std::move(c));
    }

    int call(int op, const std::vector<int>& param_map, int state) {
        Call c;
        c.op = op;
        c.args = param_map;
        c.state = state;
        c.precondition = conjunction(requires_of(op, param_map, state));
        ob_.calls.push_back(std::move(c));
        return static_cast<int>(ob_.calls.size()) - 1;
    }

    void check_precondition(int call_index) {
        const Call& c = ob_.calls[static_cast<std::size_t>(call_index)];
        std::ostringstream label;
        label << "precondition of " << spec_->op(c.op).name << " (call " << call_index + 1 << ")";
        ob_.assertions.push_back(Assertion{AssertionRole::precondition, call_index, label.str(), c.precondition});
    }

    void assert_final(AssertionRole role, std::string label, Expr f) {
        ob_.assertions.push_back(Assertion{role, -1, std::move(label), std::move(f)});
    }

    Obligation finish(std::string id, std::vector<std::string> ops) {
        ob_.id = std::move(id);
        ob_.ops = std::move(ops);
        ob_.assertions.push_back(Assertion{AssertionRole::memory_safety, -1, "memory safety", true_lit()});
        return std::move(ob_);
    }

private:
    Subst op_subst(int op, const std::vector<int>& param_map, int state) const {
        (void)op;
        Subst s;
        s.params = param_map;
        s.state_slots = {state};
        s.scalars = &ob_.scalars;
        s.states = &ob_.states;
        s.decl = &spec_->ast.state;
        return s;
    }

    std::string fresh(const std::string& base) {
        std::string name = base;
        for (int n = 2; !used_.insert(name).second; ++n) name = base + "_" + std::to_string(n);
        return name;
    }

    std::shared_ptr<const TypedSpec> spec_;
    Obligation ob_;
    std::set<std::string> used_;
};

void check_index(const TypedSpec& spec, int op) {
    if (op < 0 || op >= spec.op_count()) throw std::out_of_range("operation index " + std::to_string(op));
}

}  // namespace

std::string_view to_string(ObligationKind k) {
    switch (k) {
        case ObligationKind::safety: return "safety";
        case ObligationKind::pair:   return "pair";
        case ObligationKind::self:   return "self";
    }
    return "?";
}

std::string_view to_string(AssertionRole r) {
    switch (r) {
        case AssertionRole::precondition:   return "precondition";
        case AssertionRole::postcondition:  return "postcondition";
        case AssertionRole::invariant:      return "invariant";
        case AssertionRole::state_equality: return "state_equality";
        case AssertionRole::trivial:        return "trivial";
        case AssertionRole::memory_safety:  return "memory_safety";
    }
    return "?";
}

EqualityPredicate default_state_equality(const StateDecl& decl) {
    std::vector<Expr> parts;
    for (int f = 0; f < static_cast<int>(decl.fields.size()); ++f) {
        const Type t = decl.fields[static_cast<std::size_t>(f)].type.kind;
        Expr a = field_of(0, "s1", decl, f);
        Expr b = field_of(1, "s2", decl, f);
        if (t != Type::int_array) {
            parts.push_back(typed(Expr::binary_op(BinaryOp::eq, std::move(a), std::move(b)), Type::boolean));
            continue;
        }
        Expr len = typed(Expr::binary_op(BinaryOp::eq, typed(Expr::length(a), Type::integer),
                                         typed(Expr::length(b), Type::integer)),
                         Type::boolean);
        Expr i = Expr::var("i");
        i.type = Type::integer;
        i.ref = {RefKind::bound, 0};
        Expr cells = typed(Expr::binary_op(BinaryOp::eq, typed(Expr::index(a, i), Type::integer),
                                           typed(Expr::index(b, i), Type::integer)),
                           Type::boolean);
        Expr all = typed(Expr::array_quant(Quantifier::forall, "i", a, std::move(cells)), Type::boolean);
        parts.push_back(typed(Expr::binary_op(BinaryOp::logical_and, std::move(len), std::move(all)), Type::boolean));
    }
    return EqualityPredicate{"default_state_equality", conjunction(std::move(parts)), false};
}

EqualityPredicate state_equality(const TypedSpec& spec) {
    if (spec.ast.equality) return EqualityPredicate{spec.ast.equality->name, spec.ast.equality->body, true};
    return default_state_equality(spec.ast.state);
}

bool declared_conflict(const SpecAst& spec, const std::string& f, const std::string& g) {
    for (const auto& c : spec.conflicts) {
        if ((c.first == f && c.second == g) || (c.first == g && c.second == f)) return true;
    }
    return false;
}

Obligation gen_safety(const std::shared_ptr<const TypedSpec>& spec, int op, const VcOptions&) {
    check_index(*spec, op);
    const std::string& name = spec->op(op).name;
    Builder b(spec, ObligationKind::safety);
    std::vector<int> params;
    const int st = b.declare(op, "", params);
    if (auto inv = b.invariant_on(st)) b.assume({*inv});
    b.assume(b.requires_of(op, params, st));
    b.call(op, params, st);
    b.assert_final(AssertionRole::postcondition, "postcondition of " + name,
                   conjunction(b.ensures_of(op, params, st)));
    b.assert_final(AssertionRole::invariant, "invariant after " + name,
                   b.invariant_on(st).value_or(true_lit()));
    return b.finish("safety_" + name, {name});
}

Obligation gen_self(const std::shared_ptr<const TypedSpec>& spec, int f, const VcOptions& opt) {
    check_index(*spec, f);
    const std::string& name = spec->op(f).name;
    if (declared_conflict(spec->ast, name, name)) throw PairSkipped("(" + name + ", " + name + ") is declared");
    Builder b(spec, ObligationKind::self);
    std::vector<int> params;
    const int st = b.declare(f, "", params);
    b.assume(b.requires_of(f, params, st));
    if (opt.assume_invariant) {
        if (auto inv = b.invariant_on(st)) b.assume({*inv});
    }
    b.call(f, params, st);
    b.check_precondition(b.call(f, params, st));
    b.assert_final(AssertionRole::trivial, "true", true_lit());
    return b.finish("self_" + name, {name});
}

Obligation gen_pair(const std::shared_ptr<const TypedSpec>& spec, int f, int g, const VcOptions& opt) {
    check_index(*spec, f);
    check_index(*spec, g);
    if (f == g) throw std::invalid_argument("pair analysis needs two distinct operations; use gen_self");
    if (f > g) std::swap(f, g);
    const std::string& fname = spec->op(f).name;
    const std::string& gname = spec->op(g).name;
    if (fname == gname) throw std::invalid_argument("pair analysis needs two distinct operations");
    if (declared_conflict(spec->ast, fname, gname)) {
        throw PairSkipped("(" + fname + ", " + gname + ") is declared");
    }
    Builder b(spec, ObligationKind::pair);
    std::vector<int> x1;
    std::vector<int> x2;
    const int s1 = b.declare(f, "1", x1);
    const int s2 = b.declare(g, "2", x2);
    b.assume(b.requires_of(f, x1, s1));
    b.assume(b.requires_of(g, x2, s2));
    b.assume({b.equality(s1, s2)});
    if (opt.assume_invariant) {
        if (auto inv = b.invariant_on(s1)) b.assume({*inv});
        if (auto inv = b.invariant_on(s2)) b.assume({*inv});
    }
    b.call(g, x2, s1);
    b.check_precondition(b.call(f, x1, s1));
    b.check_precondition(b.call(f, x1, s2));
    b.check_precondition(b.call(g, x2, s2));
    b.assert_final(AssertionRole::state_equality, "state equality", b.equality(s1, s2));
    return b.finish("pair_" + fname + "_" + gname, {fname, gname});
}

ObligationSet gen_all(const std::shared_ptr<const TypedSpec>& spec, const VcOptions& opt) {
    ObligationSet out;
    const int n = spec->op_count();
    for (int i = 0; i < n; ++i) out.obligations.push_back(gen_safety(spec, i, opt));
    for (int i = 0; i < n; ++i) {
        const std::string& name = spec->op(i).name;
        if (declared_conflict(spec->ast, name, name)) {
            out.skipped.push_back({name, name});
        } else {
            out.obligations.push_back(gen_self(spec, i, opt));
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const std::string& a = spec->op(i).name;
            const std::string& c = spec->op(j).name;
            if (declared_conflict(spec->ast, a, c)) {
                out.skipped.push_back({a, c});
            } else {
                out.obligations.push_back(gen_pair(spec, i, j, opt));
            }
        }
    }
    return out;
}

std::string print_obligation(const Obligation& ob) {
    std::ostringstream out;
    std::string fn;
    switch (ob.kind) {
        case ObligationKind::safety: fn = ob.ops[0] + "_safety"; break;
        case ObligationKind::self:   fn = ob.ops[0] + "_stability"; break;
        case ObligationKind::pair:   fn = ob.ops[0] + "_" + ob.ops[1] + "_commutativity"; break;
    }
    out << "let ghost " << fn << " () =  // " << ob.id << '\n';
    for (const auto& s : ob.scalars) out << "  val ghost " << s.name << " : " << to_string(s.type) << " in\n";
    for (const auto& s : ob.states) out << "  val ghost " << s << " : " << ob.spec->ast.state.name << " in\n";
    out << "  assume { ";
    for (std::size_t i = 0; i < ob.assumptions.size(); ++i) {
        if (i != 0) out << " /\\\n           ";
        out << print_expr(ob.assumptions[i]);
    }
    if (ob.assumptions.empty()) out << "true";
    out << " };\n";
    for (std::size_t c = 0; c <= ob.calls.size(); ++c) {
        for (const auto& a : ob.assertions) {
            const bool here = c < ob.calls.size() ? a.before_call == static_cast<int>(c) : a.before_call < 0;
            if (!here || a.role == AssertionRole::memory_safety) continue;
            out << "  assert { " << print_expr(a.formula) << " };  // " << a.label << '\n';
        }
        if (c == ob.calls.size()) break;
        const Call& call = ob.calls[c];
        const auto& decl = ob.spec->op(call.op);
        out << "  " << decl.name;
        for (std::size_t p = 0; p < decl.params.size(); ++p) {
            out << ' '
                << (call.args[p] < 0 ? ob.states[static_cast<std::size_t>(call.state)]
                                     : ob.scalars[static_cast<std::size_t>(call.args[p])].name);
        }
        out << ";\n";
    }
    return out.str();
}

}  // namespace cise
