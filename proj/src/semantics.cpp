#include <cise/semantics.hpp>

#include <sstream>

namespace cise {

namespace {

// Quantifiers over larger ranges are reported as a fault instead of hanging.
constexpr Int kMaxQuantRange = Int{1} << 20;

struct IntR {
    Truth s = Truth::yes;  // yes = known value
    Int v = 0;
};

struct ArrR {
    Truth s = Truth::yes;
    const IntArray* a = nullptr;
    bool length_known = true;
    Int cells_known = 0;
};

Truth and_truth(Truth a, Truth b) {
    if (a == Truth::no || b == Truth::no) return Truth::no;
    if (a == Truth::unknown || b == Truth::unknown) return Truth::unknown;
    if (a == Truth::fault || b == Truth::fault) return Truth::fault;
    return Truth::yes;
}

Truth or_truth(Truth a, Truth b) {
    if (a == Truth::yes || b == Truth::yes) return Truth::yes;
    if (a == Truth::unknown || b == Truth::unknown) return Truth::unknown;
    if (a == Truth::fault || b == Truth::fault) return Truth::fault;
    return Truth::no;
}

Truth not_truth(Truth a) {
    if (a == Truth::yes) return Truth::no;
    if (a == Truth::no) return Truth::yes;
    return a;
}

Truth of_bool(bool b) { return b ? Truth::yes : Truth::no; }

// Strict combination of two operand statuses: a fault wins over unknown.
Truth strict(Truth a, Truth b) {
    if (a == Truth::fault || b == Truth::fault) return Truth::fault;
    if (a == Truth::unknown || b == Truth::unknown) return Truth::unknown;
    return Truth::yes;
}

class Evaluator {
public:
    Evaluator(const Frame& frame, Fault* fault) : frame_(frame), fault_(fault) {}

    Truth formula(const Expr& e) {
        switch (e.kind) {
            case ExprKind::bool_lit:
                return of_bool(e.value != 0);
            case ExprKind::var:
            case ExprKind::field: {
                IntR r = scalar(e);
                if (r.s != Truth::yes) return r.s;
                return of_bool(r.v != 0);
            }
            case ExprKind::old: {
                const bool saved = in_old_;
                in_old_ = true;
                Truth t = formula(e.kids[0]);
                in_old_ = saved;
                return t;
            }
            case ExprKind::unary:
                return not_truth(formula(e.kids[0]));
            case ExprKind::binary:
                return binary_formula(e);
            case ExprKind::quant:
                return quant(e);
            case ExprKind::array_eq: {
                ArrR a = array(e.kids[0]);
                ArrR b = array(e.kids[1]);
                const Truth s = strict(a.s, b.s);
                if (s != Truth::yes) return s;
                if (!a.length_known || !b.length_known) return Truth::unknown;
                if (a.a->size() != b.a->size()) return Truth::no;
                Truth acc = Truth::yes;
                for (std::size_t i = 0; i < a.a->size(); ++i) {
                    const auto k = static_cast<Int>(i);
                    if (k >= a.cells_known || k >= b.cells_known) {
                        acc = and_truth(acc, Truth::unknown);
                    } else if ((*a.a)[i] != (*b.a)[i]) {
                        return Truth::no;
                    }
                }
                return acc;
            }
            default:
                return Truth::fault;  // ill-typed; unreachable after typecheck
        }
    }

    IntR integer(const Expr& e) {
        switch (e.kind) {
            case ExprKind::int_lit:
                return {Truth::yes, e.value};
            case ExprKind::var:
            case ExprKind::field:
                return scalar(e);
            case ExprKind::index: {
                ArrR a = array(e.kids[0]);
                IntR i = integer(e.kids[1]);
                const Truth s = strict(a.s, i.s);
                if (s != Truth::yes) return {s, 0};
                if (!a.length_known) return {Truth::unknown, 0};
                const auto len = static_cast<Int>(a.a->size());
                if (i.v < 0 || i.v >= len) {
                    return fail({FaultKind::index_out_of_bounds, i.v, len, e.span});
                }
                if (i.v >= a.cells_known) return {Truth::unknown, 0};
                return {Truth::yes, (*a.a)[static_cast<std::size_t>(i.v)]};
            }
            case ExprKind::length: {
                ArrR a = array(e.kids[0]);
                if (a.s != Truth::yes) return {a.s, 0};
                if (!a.length_known) return {Truth::unknown, 0};
                return {Truth::yes, static_cast<Int>(a.a->size())};
            }
            case ExprKind::old: {
                const bool saved = in_old_;
                in_old_ = true;
                IntR r = integer(e.kids[0]);
                in_old_ = saved;
                return r;
            }
            case ExprKind::unary: {
                IntR r = integer(e.kids[0]);
                if (r.s != Truth::yes) return r;
                Int out = 0;
                if (__builtin_sub_overflow(Int{0}, r.v, &out)) return fail({FaultKind::overflow, 0, 0, e.span});
                return {Truth::yes, out};
            }
            case ExprKind::binary: {
                IntR a = integer(e.kids[0]);
                IntR b = integer(e.kids[1]);
                const Truth s = strict(a.s, b.s);
                if (s != Truth::yes) return {s, 0};
                Int out = 0;
                bool overflow = false;
                switch (e.binary) {
                    case BinaryOp::add: overflow = __builtin_add_overflow(a.v, b.v, &out); break;
                    case BinaryOp::sub: overflow = __builtin_sub_overflow(a.v, b.v, &out); break;
                    case BinaryOp::mul: overflow = __builtin_mul_overflow(a.v, b.v, &out); break;
                    default: return {Truth::fault, 0};
                }
                if (overflow) return fail({FaultKind::overflow, 0, 0, e.span});
                return {Truth::yes, out};
            }
            default:
                return {Truth::fault, 0};
        }
    }

    ArrR array(const Expr& e) {
        if (e.kind == ExprKind::old) {
            const bool saved = in_old_;
            in_old_ = true;
            ArrR r = array(e.kids[0]);
            in_old_ = saved;
            return r;
        }
        int slot = 0;
        int field = 0;
        if (!locate(e, slot, field)) return {Truth::fault};
        const ConcreteState* st = state(slot);
        if (st == nullptr) return {Truth::fault};
        const auto& arr = std::get<IntArray>(st->fields[static_cast<std::size_t>(field)]);
        ArrR r{Truth::yes, &arr, true, static_cast<Int>(arr.size())};
        if (const Knowledge* k = knowledge(slot)) {
            if (field > k->fixed || (field == k->fixed && k->cells < 0)) return {Truth::unknown};
            if (field == k->fixed) r.cells_known = k->cells;
        }
        return r;
    }

    // Value of an int/bool expression as an Int, bools as 0/1.
    IntR scalar_value(const Expr& e) {
        if (e.type == Type::boolean) {
            const Truth t = formula(e);
            if (t == Truth::yes || t == Truth::no) return {Truth::yes, t == Truth::yes ? 1 : 0};
            return {t, 0};
        }
        return integer(e);
    }

    std::vector<Int> bound;

private:
    IntR fail(Fault f) {
        if (fault_ != nullptr && !*fault_) *fault_ = f;
        return {Truth::fault, 0};
    }

    const ConcreteState* state(int slot) const {
        const auto& states = in_old_ ? frame_.old_states : frame_.states;
        if (slot < 0 || static_cast<std::size_t>(slot) >= states.size()) return nullptr;
        return states[static_cast<std::size_t>(slot)];
    }

    const Knowledge* knowledge(int slot) const {
        if (frame_.partial == nullptr) return nullptr;
        const auto& ks = frame_.partial->states;
        if (static_cast<std::size_t>(slot) >= ks.size()) return nullptr;
        return &ks[static_cast<std::size_t>(slot)];
    }

    static bool locate(const Expr& e, int& slot, int& field) {
        if (e.kind == ExprKind::field) {
            slot = e.kids[0].ref.index;
            field = e.ref.index;
            return true;
        }
        if (e.kind == ExprKind::var && e.ref.kind == RefKind::field) {
            slot = 0;
            field = e.ref.index;
            return true;
        }
        return false;
    }

    IntR scalar(const Expr& e) {
        if (e.kind == ExprKind::var) {
            if (e.ref.kind == RefKind::bound) return {Truth::yes, bound[static_cast<std::size_t>(e.ref.index)]};
            if (e.ref.kind == RefKind::param) {
                const auto i = static_cast<std::size_t>(e.ref.index);
                if (frame_.partial != nullptr && e.ref.index >= frame_.partial->scalars_known) {
                    return {Truth::unknown, 0};
                }
                if (i >= frame_.scalars.size()) return {Truth::fault, 0};
                return {Truth::yes, frame_.scalars[i]};
            }
        }
        int slot = 0;
        int field = 0;
        if (!locate(e, slot, field)) return {Truth::fault, 0};
        const ConcreteState* st = state(slot);
        if (st == nullptr) return {Truth::fault, 0};
        if (const Knowledge* k = knowledge(slot)) {
            if (field >= k->fixed) return {Truth::unknown, 0};
        }
        const Value& v = st->fields[static_cast<std::size_t>(field)];
        return {Truth::yes, scalar_of(v)};
    }

    Truth binary_formula(const Expr& e) {
        switch (e.binary) {
            case BinaryOp::logical_and: return and_truth(formula(e.kids[0]), formula(e.kids[1]));
            case BinaryOp::logical_or:  return or_truth(formula(e.kids[0]), formula(e.kids[1]));
            case BinaryOp::implies:     return or_truth(not_truth(formula(e.kids[0])), formula(e.kids[1]));
            default: break;
        }
        IntR a = scalar_value(e.kids[0]);
        IntR b = scalar_value(e.kids[1]);
        const Truth s = strict(a.s, b.s);
        if (s != Truth::yes) return s;
        switch (e.binary) {
            case BinaryOp::eq:  return of_bool(a.v == b.v);
            case BinaryOp::neq: return of_bool(a.v != b.v);
            case BinaryOp::lt:  return of_bool(a.v < b.v);
            case BinaryOp::le:  return of_bool(a.v <= b.v);
            case BinaryOp::gt:  return of_bool(a.v > b.v);
            case BinaryOp::ge:  return of_bool(a.v >= b.v);
            default:            return Truth::fault;
        }
    }

    Truth quant(const Expr& e) {
        Int lo = 0;
        Int hi = 0;
        if (e.over_array) {
            ArrR a = array(e.kids[0]);
            if (a.s != Truth::yes) return a.s;
            if (!a.length_known) return Truth::unknown;
            hi = static_cast<Int>(a.a->size());
        } else {
            IntR l = integer(e.kids[0]);
            IntR h = integer(e.kids[1]);
            const Truth s = strict(l.s, h.s);
            if (s != Truth::yes) return s;
            lo = l.v;
            hi = h.v;
            Int span = 0;
            if (hi > lo && (__builtin_sub_overflow(hi, lo, &span) || span > kMaxQuantRange)) {
                fail({FaultKind::range_too_large, 0, 0, e.span});
                return Truth::fault;
            }
        }
        const bool forall = e.quant == Quantifier::forall;
        Truth acc = forall ? Truth::yes : Truth::no;
        bound.push_back(0);
        for (Int i = lo; i < hi; ++i) {
            bound.back() = i;
            const Truth t = formula(e.body());
            acc = forall ? and_truth(acc, t) : or_truth(acc, t);
            if (acc == (forall ? Truth::no : Truth::yes)) break;
        }
        bound.pop_back();
        return acc;
    }

    const Frame& frame_;
    Fault* fault_;
    bool in_old_ = false;
};

class Executor {
public:
    Executor(std::span<const Int> args, ConcreteState& state) : state_(state) {
        states_[0] = &state_;
        frame_.scalars = args;
        frame_.states = states_;
        frame_.old_states = states_;
    }

    Fault run(const std::vector<Stmt>& body) {
        for (const auto& s : body) {
            if (!step(s)) return fault_;
        }
        return {};
    }

private:
    bool step(const Stmt& s) {
        switch (s.kind) {
            case StmtKind::skip:
                return true;
            case StmtKind::if_then_else: {
                Evaluator ev(frame_, &fault_);
                const Truth c = ev.formula(s.value);
                if (c == Truth::fault) return false;
                const auto& branch = c == Truth::yes ? s.then_body : s.else_body;
                for (const auto& inner : branch) {
                    if (!step(inner)) return false;
                }
                return true;
            }
            case StmtKind::assign:
                return assign(s);
        }
        return true;
    }

    bool assign(const Stmt& s) {
        Evaluator ev(frame_, &fault_);
        if (s.target.kind == ExprKind::field) {
            Value& slot = state_.fields[static_cast<std::size_t>(s.target.ref.index)];
            if (s.value.type == Type::int_array) {
                ArrR a = ev.array(s.value);
                if (a.s != Truth::yes) return fail_generic(s);
                IntArray copy = *a.a;
                slot = std::move(copy);
                return true;
            }
            IntR v = ev.scalar_value(s.value);
            if (v.s != Truth::yes) return fail_generic(s);
            if (std::holds_alternative<bool>(slot)) {
                slot = v.v != 0;
            } else {
                slot = v.v;
            }
            return true;
        }
        // s.f[i] <- e: index and value are both read before the write
        const Expr& field = s.target.kids[0];
        IntR idx = ev.integer(s.target.kids[1]);
        IntR v = ev.integer(s.value);
        if (idx.s != Truth::yes || v.s != Truth::yes) return fail_generic(s);
        auto& arr = std::get<IntArray>(state_.fields[static_cast<std::size_t>(field.ref.index)]);
        const auto len = static_cast<Int>(arr.size());
        if (idx.v < 0 || idx.v >= len) {
            fault_ = Fault{FaultKind::index_out_of_bounds, idx.v, len, s.target.span};
            return false;
        }
        arr[static_cast<std::size_t>(idx.v)] = v.v;
        return true;
    }

    bool fail_generic(const Stmt& s) {
        if (!fault_) fault_ = Fault{FaultKind::overflow, 0, 0, s.span};
        return false;
    }

    ConcreteState& state_;
    const ConcreteState* states_[1] = {nullptr};
    Frame frame_;
    Fault fault_;
};

std::vector<Int> scalar_args(const Env& env) {
    std::vector<Int> out;
    out.reserve(env.params.size());
    for (const auto& v : env.params) out.push_back(std::holds_alternative<IntArray>(v) ? 0 : scalar_of(v));
    return out;
}

}  // namespace

std::string to_string(const Value& v) {
    if (const auto* i = std::get_if<Int>(&v)) return std::to_string(*i);
    if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    std::string out = "[";
    const auto& a = std::get<IntArray>(v);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i != 0) out += ", ";
        out += std::to_string(a[i]);
    }
    return out + "]";
}

ConcreteState zero_state(const StateDecl& decl) {
    ConcreteState s;
    for (const auto& f : decl.fields) {
        switch (f.type.kind) {
            case Type::boolean:   s.fields.emplace_back(false); break;
            case Type::int_array: s.fields.emplace_back(IntArray{}); break;
            default:              s.fields.emplace_back(Int{0}); break;
        }
    }
    return s;
}

std::string to_string(const ConcreteState& s, const StateDecl& decl) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.fields.size() && i < decl.fields.size(); ++i) {
        if (i != 0) out += "; ";
        out += decl.fields[i].name + " = " + to_string(s.fields[i]);
    }
    return out + "}";
}

std::string_view to_string(FaultKind k) {
    switch (k) {
        case FaultKind::none:                return "none";
        case FaultKind::index_out_of_bounds: return "index out of bounds";
        case FaultKind::overflow:            return "integer overflow";
        case FaultKind::range_too_large:     return "quantifier range too large";
    }
    return "?";
}

std::string_view to_string(Truth t) {
    switch (t) {
        case Truth::no:      return "false";
        case Truth::yes:     return "true";
        case Truth::unknown: return "unknown";
        case Truth::fault:   return "fault";
    }
    return "?";
}

namespace {

std::string fault_message(const Fault& f) {
    std::ostringstream out;
    out << to_string(f.kind);
    if (f.kind == FaultKind::index_out_of_bounds) out << ": index " << f.index << " (length " << f.length << ')';
    if (f.span.begin.line > 0) out << " at " << f.span.begin.line << ':' << f.span.begin.col;
    return out.str();
}

}  // namespace

EvalError::EvalError(Fault f) : std::runtime_error(fault_message(f)), fault_(f) {}

Int scalar_of(const Value& v) {
    if (const auto* i = std::get_if<Int>(&v)) return *i;
    if (const auto* b = std::get_if<bool>(&v)) return *b ? 1 : 0;
    return 0;
}

Env Env::for_op(const OperationDecl& op, const std::map<std::string, Value, std::less<>>& args,
                const ConcreteState* pre) {
    Env env;
    env.pre_state = pre;
    for (const auto& p : op.params) {
        auto it = args.find(p.name);
        if (it != args.end()) {
            env.params.push_back(it->second);
        } else {
            env.params.emplace_back(Int{0});
        }
    }
    return env;
}

Value eval_expr(const Expr& e, const Env& env, const ConcreteState& state) {
    const std::vector<Int> scalars = scalar_args(env);
    const ConcreteState* states[1] = {&state};
    const ConcreteState* olds[1] = {env.pre_state != nullptr ? env.pre_state : &state};
    Frame frame{scalars, states, olds, nullptr};
    Fault fault;
    Evaluator ev(frame, &fault);
    switch (e.type) {
        case Type::boolean: {
            const Truth t = ev.formula(e);
            if (t == Truth::fault) throw EvalError(fault);
            return t == Truth::yes;
        }
        case Type::int_array: {
            ArrR a = ev.array(e);
            if (a.s != Truth::yes) throw EvalError(fault);
            return *a.a;
        }
        default: {
            IntR r = ev.integer(e);
            if (r.s != Truth::yes) throw EvalError(fault);
            return r.v;
        }
    }
}

bool holds(const Expr& f, const Env& env, const ConcreteState& state, const ConcreteState* pre_state) {
    const std::vector<Int> scalars = scalar_args(env);
    const ConcreteState* pre = pre_state != nullptr ? pre_state : env.pre_state;
    const ConcreteState* states[1] = {&state};
    const ConcreteState* olds[1] = {pre != nullptr ? pre : &state};
    Frame frame{scalars, states, olds, nullptr};
    Fault fault;
    const Truth t = eval_truth(f, frame, &fault);
    if (t == Truth::fault) throw EvalError(fault);
    return t == Truth::yes;
}

ConcreteState exec_body(const OperationDecl& op, const Env& args, const ConcreteState& state) {
    ConcreteState out = state;
    const std::vector<Int> scalars = scalar_args(args);
    if (Fault f = exec_in_place(op, scalars, out)) throw EvalError(f);
    return out;
}

Truth eval_truth(const Expr& f, const Frame& frame, Fault* fault) {
    Evaluator ev(frame, fault);
    return ev.formula(f);
}

Fault exec_in_place(const OperationDecl& op, std::span<const Int> args, ConcreteState& state) {
    Executor ex(args, state);
    return ex.run(op.body);
}

}  // namespace cise
