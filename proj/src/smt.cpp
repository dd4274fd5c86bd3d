#include <cise/smt.hpp>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

namespace cise {

namespace {

TermPtr mk(TermKind k, std::vector<TermPtr> args = {}, std::string name = {}, Int value = 0) {
    auto t = std::make_shared<Term>();
    t->kind = k;
    t->args = std::move(args);
    t->name = std::move(name);
    t->value = value;
    return t;
}

TermPtr int_const(Int v) { return mk(TermKind::int_const, {}, {}, v); }
TermPtr bool_const(bool b) { return mk(TermKind::bool_const, {}, {}, b ? 1 : 0); }
TermPtr sym(std::string name) { return mk(TermKind::sym, {}, std::move(name)); }
TermPtr bound_var(std::string name) { return mk(TermKind::bound, {}, std::move(name)); }
TermPtr select(std::string fn, TermPtr idx) { return mk(TermKind::select, {std::move(idx)}, std::move(fn)); }
TermPtr app(TermKind k, TermPtr a) { return mk(k, {std::move(a)}); }
TermPtr app(TermKind k, TermPtr a, TermPtr b) { return mk(k, {std::move(a), std::move(b)}); }
TermPtr ite(TermPtr c, TermPtr a, TermPtr b) { return mk(TermKind::ite, {std::move(c), std::move(a), std::move(b)}); }

const std::set<std::string, std::less<>>& reserved() {
    static const std::set<std::string, std::less<>> words = {
        "_", "!", "as", "let", "exists", "forall", "match", "par", "and", "or", "not", "xor", "ite", "distinct",
        "true", "false", "Int", "Bool", "Real", "Array", "select", "store", "div", "mod", "abs", "to_real",
        "to_int", "is_int", "assert", "push", "pop", "echo", "exit", "BINARY", "DECIMAL", "HEXADECIMAL",
        "NUMERAL", "STRING"};
    return words;
}

std::string quote(const std::string& name) {
    if (reserved().count(name) != 0) return "|" + name + "|";
    return name;
}

void print(std::ostream& out, const Term& t) {
    auto nary = [&](const char* op) {
        out << '(' << op;
        for (const auto& a : t.args) {
            out << ' ';
            print(out, *a);
        }
        out << ')';
    };
    switch (t.kind) {
        case TermKind::int_const:
            if (t.value < 0) {
                // the magnitude of INT64_MIN does not fit, print it digit-wise
                std::string digits = std::to_string(t.value).substr(1);
                out << "(- " << digits << ')';
            } else {
                out << t.value;
            }
            return;
        case TermKind::bool_const: out << (t.value != 0 ? "true" : "false"); return;
        case TermKind::sym:
        case TermKind::bound: out << quote(t.name); return;
        case TermKind::select:
            out << '(' << quote(t.name) << ' ';
            print(out, *t.args[0]);
            out << ')';
            return;
        case TermKind::ite: nary("ite"); return;
        case TermKind::not_: nary("not"); return;
        case TermKind::and_: nary("and"); return;
        case TermKind::or_: nary("or"); return;
        case TermKind::implies: nary("=>"); return;
        case TermKind::eq: nary("="); return;
        case TermKind::lt: nary("<"); return;
        case TermKind::le: nary("<="); return;
        case TermKind::gt: nary(">"); return;
        case TermKind::ge: nary(">="); return;
        case TermKind::add: nary("+"); return;
        case TermKind::sub: nary("-"); return;
        case TermKind::mul: nary("*"); return;
        case TermKind::neg: nary("-"); return;
        case TermKind::forall:
        case TermKind::exists: {
            const bool all = t.kind == TermKind::forall;
            const std::string v = quote(t.name);
            out << (all ? "(forall ((" : "(exists ((") << v << " Int)) (" << (all ? "=> " : "and ") << "(and (<= ";
            print(out, *t.args[0]);
            out << ' ' << v << ") (< " << v << ' ';
            print(out, *t.args[1]);
            out << ")) ";
            print(out, *t.args[2]);
            out << "))";
            return;
        }
    }
}

struct ArrayRef {
    std::string fn;
    TermPtr len;
};

struct FieldVal {
    TermPtr scalar;
    ArrayRef array;
};

using SymState = std::vector<FieldVal>;

struct Ctx {
    std::vector<TermPtr> params;  // by scalar slot of the expression's namespace
    std::vector<const SymState*> states;
    std::vector<const SymState*> olds;
    std::vector<std::string> bound;
    bool in_old = false;
};

class Encoder {
public:
    explicit Encoder(const Obligation& ob) : ob_(ob), decl_(ob.spec->ast.state) {}

    SmtDoc run() {
        doc_.obligation_id = ob_.id;
        declare();
        std::vector<TermPtr> scalars;
        for (const auto& s : ob_.scalars) scalars.push_back(sym(s.name));
        const std::vector<SymState> initial = states_;

        Ctx base;
        base.params = scalars;
        for (const auto& st : initial) base.olds.push_back(&st);

        auto point = [&](const std::vector<SymState>& now) {
            Ctx c = base;
            for (const auto& st : now) c.states.push_back(&st);
            return c;
        };

        {
            const Ctx c = point(initial);
            for (const auto& a : ob_.assumptions) doc_.assumptions.push_back(expr(a, c));
        }
        std::vector<std::vector<SymState>> before(ob_.calls.size());
        for (std::size_t k = 0; k < ob_.calls.size(); ++k) {
            before[k] = states_;
            call(static_cast<int>(k), scalars);
        }
        for (std::size_t a = 0; a < ob_.assertions.size(); ++a) {
            const Assertion& as = ob_.assertions[a];
            if (as.role == AssertionRole::memory_safety) continue;
            const Ctx c = point(as.before_call >= 0 ? before[static_cast<std::size_t>(as.before_call)] : states_);
            doc_.goals.push_back(SmtGoal{static_cast<int>(a), as.label, expr(as.formula, c)});
        }
        doc_.logic = nonlinear_ ? "UFNIA" : "UFLIA";
        render();
        return std::move(doc_);
    }

private:
    void declare() {
        for (std::size_t i = 0; i < ob_.scalars.size(); ++i) {
            doc_.decls.push_back({SmtDecl::Kind::scalar, ob_.scalars[i].name, ob_.scalars[i].type,
                                  static_cast<int>(i), -1});
        }
        for (std::size_t s = 0; s < ob_.states.size(); ++s) {
            SymState st(decl_.fields.size());
            for (std::size_t f = 0; f < decl_.fields.size(); ++f) {
                const std::string base = ob_.states[s] + "." + decl_.fields[f].name;
                const Type t = decl_.fields[f].type.kind;
                if (t == Type::int_array) {
                    doc_.decls.push_back({SmtDecl::Kind::array, base, Type::int_array, static_cast<int>(s),
                                          static_cast<int>(f)});
                    doc_.decls.push_back({SmtDecl::Kind::length, base + ".len", Type::integer,
                                          static_cast<int>(s), static_cast<int>(f)});
                    st[f].array = {base, sym(base + ".len")};
                    length_facts_.push_back(app(TermKind::ge, sym(base + ".len"), int_const(0)));
                } else {
                    doc_.decls.push_back({SmtDecl::Kind::field, base, t, static_cast<int>(s), static_cast<int>(f)});
                    st[f].scalar = sym(base);
                }
            }
            states_.push_back(std::move(st));
        }
    }

    std::string version(int state, std::size_t field) {
        const std::string base = ob_.states[static_cast<std::size_t>(state)] + "." + decl_.fields[field].name;
        return base + "@" + std::to_string(++versions_[base]);
    }

    void define_const(const std::string& name, Type sort, TermPtr body) {
        doc_.defs.push_back(SmtDef{name, false, {}, sort, std::move(body)});
    }

    void define_array(const std::string& name, TermPtr body) {
        doc_.defs.push_back(SmtDef{name, true, "x!0", Type::integer, std::move(body)});
    }

    void call(int k, const std::vector<TermPtr>& scalars) {
        const Call& c = ob_.calls[static_cast<std::size_t>(k)];
        const auto& op = ob_.spec->op(c.op);
        call_starts_.push_back(doc_.defs.size());
        std::ostringstream head;
        head << op.name;
        for (std::size_t p = 0; p < op.params.size(); ++p) {
            head << ' '
                 << (c.args[p] < 0 ? ob_.states[static_cast<std::size_t>(c.state)]
                                   : ob_.scalars[static_cast<std::size_t>(c.args[p])].name);
        }
        call_heads_.push_back(head.str());
        std::vector<TermPtr> params(op.params.size());
        for (std::size_t p = 0; p < op.params.size(); ++p) {
            if (c.args[p] >= 0) params[p] = scalars[static_cast<std::size_t>(c.args[p])];
        }
        SymState& st = states_[static_cast<std::size_t>(c.state)];
        exec(op.body, params, c.state, st);
    }

    void exec(const std::vector<Stmt>& body, const std::vector<TermPtr>& params, int state, SymState& st) {
        for (const auto& s : body) step(s, params, state, st);
    }

    Ctx body_ctx(const std::vector<TermPtr>& params, const SymState& st) const {
        Ctx c;
        c.params = params;
        c.states = {&st};
        c.olds = {&st};
        return c;
    }

    void step(const Stmt& s, const std::vector<TermPtr>& params, int state, SymState& st) {
        switch (s.kind) {
            case StmtKind::skip: return;
            case StmtKind::assign: {
                const Ctx c = body_ctx(params, st);
                if (s.target.kind == ExprKind::field) {
                    const auto f = static_cast<std::size_t>(s.target.ref.index);
                    if (s.value.type == Type::int_array) {
                        st[f].array = array(s.value, c);
                        return;
                    }
                    const std::string name = version(state, f);
                    define_const(name, s.value.type, expr(s.value, c));
                    st[f].scalar = sym(name);
                    return;
                }
                const auto f = static_cast<std::size_t>(s.target.kids[0].ref.index);
                TermPtr idx = expr(s.target.kids[1], c);
                TermPtr val = expr(s.value, c);
                const std::string name = version(state, f);
                define_array(name, ite(app(TermKind::eq, bound_var("x!0"), idx), val,
                                       select(st[f].array.fn, bound_var("x!0"))));
                st[f].array.fn = name;
                return;
            }
            case StmtKind::if_then_else: {
                TermPtr cond = expr(s.value, body_ctx(params, st));
                SymState a = st;
                SymState b = st;
                exec(s.then_body, params, state, a);
                exec(s.else_body, params, state, b);
                for (std::size_t f = 0; f < st.size(); ++f) {
                    if (decl_.fields[f].type.kind != Type::int_array) {
                        if (a[f].scalar == b[f].scalar) {
                            st[f].scalar = a[f].scalar;
                            continue;
                        }
                        const std::string name = version(state, f);
                        define_const(name, decl_.fields[f].type.kind, ite(cond, a[f].scalar, b[f].scalar));
                        st[f].scalar = sym(name);
                        continue;
                    }
                    if (a[f].array.fn == b[f].array.fn) {
                        st[f].array.fn = a[f].array.fn;
                    } else {
                        const std::string name = version(state, f);
                        define_array(name, ite(cond, select(a[f].array.fn, bound_var("x!0")),
                                               select(b[f].array.fn, bound_var("x!0"))));
                        st[f].array.fn = name;
                    }
                    if (a[f].array.len == b[f].array.len) {
                        st[f].array.len = a[f].array.len;
                    } else {
                        const std::string name = st[f].array.fn + ".len";
                        define_const(name, Type::integer, ite(cond, a[f].array.len, b[f].array.len));
                        st[f].array.len = sym(name);
                    }
                }
                return;
            }
        }
    }

    static const SymState& state_of(const Expr& var, const Ctx& c) {
        const auto slot = static_cast<std::size_t>(var.ref.index);
        return *(c.in_old ? c.olds : c.states).at(slot);
    }

    ArrayRef array(const Expr& e, const Ctx& c) {
        if (e.kind == ExprKind::old) {
            Ctx inner = c;
            inner.in_old = true;
            return array(e.kids[0], inner);
        }
        if (e.kind != ExprKind::field) throw UnsupportedConstruct("array expression " + print_expr(e));
        return state_of(e.kids[0], c)[static_cast<std::size_t>(e.ref.index)].array;
    }

    TermPtr quant(bool all, TermPtr lo, TermPtr hi, const Expr& body, Ctx c) {
        std::string v = "q!" + std::to_string(c.bound.size());
        c.bound.push_back(v);
        TermPtr b = expr(body, c);
        return mk(all ? TermKind::forall : TermKind::exists, {std::move(lo), std::move(hi), std::move(b)}, v);
    }

    TermPtr expr(const Expr& e, const Ctx& c) {
        switch (e.kind) {
            case ExprKind::int_lit: return int_const(e.value);
            case ExprKind::bool_lit: return bool_const(e.value != 0);
            case ExprKind::var:
                switch (e.ref.kind) {
                    case RefKind::param: return c.params.at(static_cast<std::size_t>(e.ref.index));
                    case RefKind::bound: return bound_var(c.bound.at(static_cast<std::size_t>(e.ref.index)));
                    default: throw UnsupportedConstruct("unexpected reference '" + e.name + "'");
                }
            case ExprKind::field:
                if (e.type == Type::int_array) throw UnsupportedConstruct("array used as a value");
                return state_of(e.kids[0], c)[static_cast<std::size_t>(e.ref.index)].scalar;
            case ExprKind::index: {
                ArrayRef a = array(e.kids[0], c);
                return select(a.fn, expr(e.kids[1], c));
            }
            case ExprKind::length: return array(e.kids[0], c).len;
            case ExprKind::old: {
                Ctx inner = c;
                inner.in_old = true;
                return expr(e.kids[0], inner);
            }
            case ExprKind::unary:
                return app(e.unary == UnaryOp::neg ? TermKind::neg : TermKind::not_, expr(e.kids[0], c));
            case ExprKind::binary: {
                TermPtr a = expr(e.kids[0], c);
                TermPtr b = expr(e.kids[1], c);
                switch (e.binary) {
                    case BinaryOp::add: return app(TermKind::add, a, b);
                    case BinaryOp::sub: return app(TermKind::sub, a, b);
                    case BinaryOp::mul:
                        if (!literal(*a) && !literal(*b)) nonlinear_ = true;
                        return app(TermKind::mul, a, b);
                    case BinaryOp::eq: return app(TermKind::eq, a, b);
                    case BinaryOp::neq: return app(TermKind::not_, app(TermKind::eq, a, b));
                    case BinaryOp::lt: return app(TermKind::lt, a, b);
                    case BinaryOp::le: return app(TermKind::le, a, b);
                    case BinaryOp::gt: return app(TermKind::gt, a, b);
                    case BinaryOp::ge: return app(TermKind::ge, a, b);
                    case BinaryOp::logical_and: return app(TermKind::and_, a, b);
                    case BinaryOp::logical_or: return app(TermKind::or_, a, b);
                    case BinaryOp::implies: return app(TermKind::implies, a, b);
                }
                break;
            }
            case ExprKind::quant: {
                const bool all = e.quant == Quantifier::forall;
                if (e.over_array) return quant(all, int_const(0), array(e.kids[0], c).len, e.body(), c);
                return quant(all, expr(e.kids[0], c), expr(e.kids[1], c), e.body(), c);
            }
            case ExprKind::array_eq: {
                ArrayRef a = array(e.kids[0], c);
                ArrayRef b = array(e.kids[1], c);
                std::string v = "q!" + std::to_string(c.bound.size());
                TermPtr cells = app(TermKind::eq, select(a.fn, bound_var(v)), select(b.fn, bound_var(v)));
                return app(TermKind::and_, app(TermKind::eq, a.len, b.len),
                           mk(TermKind::forall, {int_const(0), a.len, cells}, v));
            }
        }
        throw UnsupportedConstruct("expression " + print_expr(e));
    }

    static bool literal(const Term& t) {
        return t.kind == TermKind::int_const || (t.kind == TermKind::neg && literal(*t.args[0]));
    }

    static const char* sort(Type t) { return t == Type::boolean ? "Bool" : "Int"; }

    void render() {
        doc_.assumptions.insert(doc_.assumptions.begin(), length_facts_.begin(), length_facts_.end());
        std::ostringstream out;
        out << "; " << ob_.id << "\n; spec " << ob_.spec_hash << '\n';
        out << "(set-option :produce-models true)\n(set-logic " << doc_.logic << ")\n";
        for (const auto& d : doc_.decls) {
            if (d.kind == SmtDecl::Kind::array) {
                out << "(declare-fun " << quote(d.name) << " (Int) Int)\n";
            } else {
                out << "(declare-const " << quote(d.name) << ' ' << sort(d.sort) << ")\n";
            }
        }
        for (const auto& a : doc_.assumptions) {
            out << "(assert ";
            print(out, *a);
            out << ")\n";
        }
        std::size_t next_call = 0;
        for (std::size_t i = 0; i <= doc_.defs.size(); ++i) {
            while (next_call < call_starts_.size() && call_starts_[next_call] == i) {
                out << "; call " << next_call + 1 << ": " << call_heads_[next_call] << '\n';
                ++next_call;
            }
            if (i == doc_.defs.size()) break;
            const SmtDef& d = doc_.defs[i];
            out << "(define-fun " << quote(d.name);
            if (d.is_array) {
                out << " ((" << d.param << " Int)) Int ";
            } else {
                out << " () " << sort(d.sort) << ' ';
            }
            print(out, *d.body);
            out << ")\n";
        }
        for (std::size_t g = 0; g < doc_.goals.size(); ++g) {
            const SmtGoal& goal = doc_.goals[g];
            out << "; goal " << g + 1 << ": " << goal.label << "\n(push 1)\n(assert (not ";
            print(out, *goal.formula);
            out << "))\n(check-sat)\n";
            out << "(pop 1)\n(assert ";
            print(out, *goal.formula);
            out << ")\n";
        }
        out << "(exit)\n";
        doc_.text = out.str();
    }

    const Obligation& ob_;
    const StateDecl& decl_;
    SmtDoc doc_;
    std::vector<SymState> states_;
    std::vector<TermPtr> length_facts_;
    std::map<std::string, int> versions_;
    std::vector<std::size_t> call_starts_;
    std::vector<std::string> call_heads_;
    bool nonlinear_ = false;
};

// ---- evaluation ----

class TermEval {
public:
    TermEval(const SmtDoc& doc, const Obligation& ob, const Valuation& v) : doc_(doc) {
        for (const auto& d : doc.decls) {
            switch (d.kind) {
                case SmtDecl::Kind::scalar:
                    consts_[d.name] = v.scalars.at(static_cast<std::size_t>(d.symbol));
                    break;
                case SmtDecl::Kind::field:
                    consts_[d.name] = scalar_of(field(v, d));
                    break;
                case SmtDecl::Kind::array:
                    base_[d.name] = &std::get<IntArray>(field(v, d));
                    break;
                case SmtDecl::Kind::length:
                    consts_[d.name] = static_cast<Int>(std::get<IntArray>(field(v, d)).size());
                    break;
            }
        }
        (void)ob;
        for (const auto& d : doc.defs) {
            if (d.is_array) {
                defs_[d.name] = &d;
            } else {
                consts_[d.name] = eval(*d.body);
            }
        }
    }

    bool truth(const Term& t) { return eval(t) != 0; }

private:
    static const Value& field(const Valuation& v, const SmtDecl& d) {
        return v.states.at(static_cast<std::size_t>(d.symbol)).fields.at(static_cast<std::size_t>(d.field));
    }

    Int eval(const Term& t) {
        auto arg = [&](std::size_t i) { return eval(*t.args[i]); };
        switch (t.kind) {
            case TermKind::int_const: return t.value;
            case TermKind::bool_const: return t.value;
            case TermKind::sym: return consts_.at(t.name);
            case TermKind::bound: return bound_.at(t.name);
            case TermKind::select: {
                const Int i = arg(0);
                if (auto it = base_.find(t.name); it != base_.end()) {
                    const IntArray& a = *it->second;
                    return i >= 0 && i < static_cast<Int>(a.size()) ? a[static_cast<std::size_t>(i)] : 0;
                }
                const SmtDef& d = *defs_.at(t.name);
                auto saved = bound_.find(d.param) != bound_.end() ? std::optional<Int>(bound_[d.param]) : std::nullopt;
                bound_[d.param] = i;
                const Int r = eval(*d.body);
                if (saved) {
                    bound_[d.param] = *saved;
                } else {
                    bound_.erase(d.param);
                }
                return r;
            }
            case TermKind::ite: return arg(0) != 0 ? arg(1) : arg(2);
            case TermKind::not_: return arg(0) == 0 ? 1 : 0;
            case TermKind::and_: return arg(0) != 0 && arg(1) != 0 ? 1 : 0;
            case TermKind::or_: return arg(0) != 0 || arg(1) != 0 ? 1 : 0;
            case TermKind::implies: return arg(0) == 0 || arg(1) != 0 ? 1 : 0;
            case TermKind::eq: return arg(0) == arg(1) ? 1 : 0;
            case TermKind::lt: return arg(0) < arg(1) ? 1 : 0;
            case TermKind::le: return arg(0) <= arg(1) ? 1 : 0;
            case TermKind::gt: return arg(0) > arg(1) ? 1 : 0;
            case TermKind::ge: return arg(0) >= arg(1) ? 1 : 0;
            case TermKind::add: return arg(0) + arg(1);
            case TermKind::sub: return arg(0) - arg(1);
            case TermKind::mul: return arg(0) * arg(1);
            case TermKind::neg: return -arg(0);
            case TermKind::forall:
            case TermKind::exists: {
                const bool all = t.kind == TermKind::forall;
                const Int lo = arg(0);
                const Int hi = arg(1);
                if (hi > lo && hi - lo > (Int{1} << 20)) throw std::range_error("quantifier range too large");
                Int result = all ? 1 : 0;
                // defined bodies are closed terms, so a binder may shadow one at the call site
                const auto outer = bound_.find(t.name);
                const std::optional<Int> saved = outer != bound_.end() ? std::optional<Int>(outer->second) : std::nullopt;
                for (Int i = lo; i < hi; ++i) {
                    bound_[t.name] = i;
                    const bool b = eval(*t.args[2]) != 0;
                    if (all && !b) {
                        result = 0;
                        break;
                    }
                    if (!all && b) {
                        result = 1;
                        break;
                    }
                }
                if (saved) {
                    bound_[t.name] = *saved;
                } else {
                    bound_.erase(t.name);
                }
                return result;
            }
        }
        return 0;
    }

    const SmtDoc& doc_;
    std::map<std::string, Int, std::less<>> consts_;
    std::map<std::string, const IntArray*, std::less<>> base_;
    std::map<std::string, const SmtDef*, std::less<>> defs_;
    std::map<std::string, Int, std::less<>> bound_;
};

// ---- solver process ----

using Clock = std::chrono::steady_clock;

std::vector<std::string> split_command(const std::string& cmd) {
    std::istringstream in(cmd);
    std::vector<std::string> argv;
    for (std::string w; in >> w;) argv.push_back(w);
    if (argv.size() == 1) {
        const std::string& p = argv[0];
        const std::string base = p.substr(p.find_last_of('/') == std::string::npos ? 0 : p.find_last_of('/') + 1);
        if (base == "z3") argv.emplace_back("-in");
    }
    return argv;
}

class Process {
public:
    explicit Process(const std::vector<std::string>& argv) {
        if (argv.empty()) throw SolverSpawnError("empty solver command");
        int in_pair[2];
        int out_pipe[2];
        int err_pipe[2];
        if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0 ||
            pipe2(out_pipe, O_CLOEXEC) != 0 || pipe2(err_pipe, O_CLOEXEC) != 0) {
            throw SolverSpawnError(std::string("cannot create pipes: ") + std::strerror(errno));
        }
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        pid_ = fork();
        if (pid_ < 0) throw SolverSpawnError(std::string("fork failed: ") + std::strerror(errno));
        if (pid_ == 0) {
            dup2(in_pair[1], STDIN_FILENO);
            dup2(out_pipe[1], STDOUT_FILENO);
            const int devnull = open("/dev/null", O_WRONLY);
            if (devnull >= 0) dup2(devnull, STDERR_FILENO);
            execvp(args[0], args.data());
            const int e = errno;
            (void)!write(err_pipe[1], &e, sizeof e);
            _exit(127);
        }
        close(in_pair[1]);
        close(out_pipe[1]);
        close(err_pipe[1]);
        in_ = in_pair[0];
        out_ = out_pipe[0];
        int e = 0;
        const ssize_t n = read(err_pipe[0], &e, sizeof e);
        close(err_pipe[0]);
        if (n == static_cast<ssize_t>(sizeof e)) {
            waitpid(pid_, nullptr, 0);
            pid_ = -1;
            throw SolverSpawnError("cannot run '" + argv[0] + "': " + std::strerror(e));
        }
        fcntl(out_, F_SETFL, fcntl(out_, F_GETFL) | O_NONBLOCK);
    }

    Process(const Process&) = delete;
    Process& operator=(const Process&) = delete;

    ~Process() {
        if (in_ >= 0) close(in_);
        if (out_ >= 0) close(out_);
        if (pid_ > 0) {
            kill(pid_, SIGKILL);
            waitpid(pid_, nullptr, 0);
        }
    }

    /// False on deadline. Throws ProtocolError if the solver went away.
    bool write_all(std::string_view data, Clock::time_point deadline) {
        while (!data.empty()) {
            if (!wait(in_, POLLOUT, deadline)) return false;
            const ssize_t n = send(in_, data.data(), data.size(), MSG_NOSIGNAL | MSG_DONTWAIT);
            if (n < 0) {
                if (errno == EAGAIN || errno == EINTR) continue;
                throw ProtocolError("solver closed its input: " + std::string(std::strerror(errno)));
            }
            data.remove_prefix(static_cast<std::size_t>(n));
        }
        return true;
    }

    /// Next non-empty line; nullopt on deadline. Throws ProtocolError at EOF.
    std::optional<std::string> read_line(Clock::time_point deadline) {
        for (;;) {
            const auto nl = buf_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buf_.substr(0, nl);
                buf_.erase(0, nl + 1);
                while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
                if (line.empty()) continue;
                return line;
            }
            if (!wait(out_, POLLIN, deadline)) return std::nullopt;
            char chunk[4096];
            const ssize_t n = read(out_, chunk, sizeof chunk);
            if (n < 0) {
                if (errno == EAGAIN || errno == EINTR) continue;
                throw ProtocolError(std::string("reading solver output: ") + std::strerror(errno));
            }
            if (n == 0) {
                if (!buf_.empty()) {
                    std::string line = std::move(buf_);
                    buf_.clear();
                    return line;
                }
                throw ProtocolError("solver exited before answering");
            }
            buf_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void finish(Clock::time_point deadline) {
        close(in_);
        in_ = -1;
        while (Clock::now() < deadline) {
            int status = 0;
            if (waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                return;
            }
            usleep(1000);
        }
    }

private:
    static bool wait(int fd, short events, Clock::time_point deadline) {
        for (;;) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
            if (left <= 0) return false;
            pollfd p{fd, events, 0};
            const int r = poll(&p, 1, static_cast<int>(std::min<long long>(left, 1000)));
            if (r > 0) return true;
            if (r < 0 && errno != EINTR) throw ProtocolError(std::string("poll: ") + std::strerror(errno));
        }
    }

    pid_t pid_ = -1;
    int in_ = -1;
    int out_ = -1;
    std::string buf_;
};

int paren_balance(const std::string& line) {
    int depth = 0;
    bool quoted = false;
    bool string = false;
    for (char ch : line) {
        if (string) {
            if (ch == '"') string = false;
            continue;
        }
        if (quoted) {
            if (ch == '|') quoted = false;
            continue;
        }
        if (ch == '"') string = true;
        else if (ch == '|') quoted = true;
        else if (ch == '(') ++depth;
        else if (ch == ')') --depth;
    }
    return depth;
}

// Chunk boundaries are recomputed from the rendered text: each ends right
// after a "(check-sat)\n" line.
std::vector<std::size_t> chunk_ends(const std::string& text) {
    std::vector<std::size_t> out;
    const std::string marker = "(check-sat)\n";
    for (std::size_t at = text.find(marker); at != std::string::npos; at = text.find(marker, at + 1)) {
        out.push_back(at + marker.size());
    }
    return out;
}

}  // namespace

std::string to_smtlib(const Term& t) {
    std::ostringstream out;
    print(out, t);
    return out.str();
}

SmtDoc emit(const Obligation& ob) {
    Encoder enc(ob);
    return enc.run();
}

SmtEvaluation evaluate(const SmtDoc& doc, const Obligation& ob, const Valuation& v) {
    TermEval ev(doc, ob, v);
    SmtEvaluation out;
    for (const auto& a : doc.assumptions) out.assumptions.push_back(ev.truth(*a));
    for (const auto& g : doc.goals) out.goals.push_back(ev.truth(*g.formula));
    return out;
}

std::string_view to_string(GoalStatus s) {
    switch (s) {
        case GoalStatus::proved:        return "proved";
        case GoalStatus::counter_model: return "counter_model";
        case GoalStatus::unknown:       return "unknown";
        case GoalStatus::timeout:       return "timeout";
    }
    return "?";
}

SolverVerdict discharge(const SmtDoc& doc, const std::string& solver_cmd, double timeout_s) {
    const auto start = Clock::now();
    const auto deadline = start + std::chrono::microseconds(static_cast<long long>(timeout_s * 1e6));
    SolverVerdict out;
    for (const auto& g : doc.goals) out.goals.push_back(GoalResult{g.assertion, GoalStatus::timeout, {}});

    const auto ends = chunk_ends(doc.text);
    if (ends.size() != doc.goals.size()) throw ProtocolError("document has no check for some goal");

    Process proc(split_command(solver_cmd));
    std::size_t written = 0;
    auto stop = [&] {
        out.timed_out = true;
        out.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        return out;
    };
    for (std::size_t g = 0; g < ends.size(); ++g) {
        if (!proc.write_all(std::string_view(doc.text).substr(written, ends[g] - written), deadline)) return stop();
        written = ends[g];
        auto line = proc.read_line(deadline);
        if (!line) return stop();
        GoalResult& r = out.goals[g];
        if (*line == "unsat") {
            r.status = GoalStatus::proved;
        } else if (*line == "sat") {
            r.status = GoalStatus::counter_model;
            if (!proc.write_all("(get-model)\n", deadline)) return stop();
            int depth = 0;
            do {
                auto m = proc.read_line(deadline);
                if (!m) return stop();
                depth += paren_balance(*m);
                r.model += *m + '\n';
            } while (depth > 0);
        } else if (*line == "unknown" || *line == "timeout") {
            r.status = GoalStatus::unknown;
        } else {
            throw ProtocolError("unexpected solver reply to goal " + std::to_string(g + 1) + ": " + *line);
        }
    }
    proc.write_all(std::string_view(doc.text).substr(written), deadline);
    proc.finish(std::min(deadline, Clock::now() + std::chrono::milliseconds(500)));
    out.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return out;
}

}  // namespace cise
