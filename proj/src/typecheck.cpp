#include <cise/frontend.hpp>
#include <cise/hash.hpp>

#include <set>

namespace cise {

namespace {

enum class Clause { invariant, requires_clause, ensures_clause, body, equality };

std::string_view clause_name(Clause c) {
    switch (c) {
        case Clause::invariant:       return "the invariant";
        case Clause::requires_clause: return "a requires clause";
        case Clause::ensures_clause:  return "an ensures clause";
        case Clause::body:            return "an operation body";
        case Clause::equality:        return "the state-equality predicate";
    }
    return "?";
}

bool references_bound(const Expr& e, int depth) {
    if (e.kind == ExprKind::var && e.ref.kind == RefKind::bound && e.ref.index == depth) return true;
    for (const auto& k : e.kids) {
        if (references_bound(k, depth)) return true;
    }
    return false;
}

class Checker {
public:
    explicit Checker(SpecAst& spec) : spec_(spec) {}

    void run() {
        check_state_decl();
        std::set<std::string, std::less<>> op_names;
        for (auto& op : spec_.operations) {
            if (!op_names.insert(op.name).second) {
                error(op.span, "duplicate operation '" + op.name + "'");
            }
            check_operation(op);
        }
        if (spec_.equality) check_equality(*spec_.equality);
        if (!diags_.empty()) throw SpecError(SpecErrorKind::type, std::move(diags_));
    }

private:
    void error(Span span, std::string message) {
        diags_.push_back(Diagnostic{span, Severity::error, std::move(message)});
    }

    void check_state_decl() {
        std::set<std::string, std::less<>> names;
        for (const auto& f : spec_.state.fields) {
            if (!names.insert(f.name).second) error(f.span, "duplicate field '" + f.name + "'");
            if (f.type.kind == Type::state) {
                error(f.span, "field '" + f.name + "' has record type '" + f.type.name +
                                  "'; fields must be int, bool or array int");
            }
        }
        if (spec_.state.invariant) {
            clause_ = Clause::invariant;
            op_ = nullptr;
            eq_ = nullptr;
            expect_bool(*spec_.state.invariant, "invariant");
        }
    }

    void check_operation(OperationDecl& op) {
        op_ = &op;
        eq_ = nullptr;
        op.state_param = -1;
        std::set<std::string, std::less<>> names;
        for (std::size_t i = 0; i < op.params.size(); ++i) {
            const auto& p = op.params[i];
            if (!names.insert(p.name).second) error(p.span, "duplicate parameter '" + p.name + "'");
            if (p.type.kind == Type::int_array) {
                error(p.span, "parameter '" + p.name + "' has type array int; operation arguments must be int or bool");
            }
            if (p.type.kind != Type::state) continue;
            if (p.type.name != spec_.state.name) {
                error(p.span, "unknown type '" + p.type.name + "' (the state type is '" + spec_.state.name + "')");
            } else if (op.state_param >= 0) {
                error(p.span, "operation '" + op.name + "' takes more than one state parameter");
            } else {
                op.state_param = static_cast<int>(i);
            }
        }
        if (op.state_param < 0) {
            error(op.span, "operation '" + op.name + "' is missing its state parameter `(" + "state : " +
                               spec_.state.name + ")`");
        }
        clause_ = Clause::requires_clause;
        for (auto& r : op.requires_clauses) expect_bool(r, "requires clause");
        clause_ = Clause::ensures_clause;
        for (auto& r : op.ensures_clauses) expect_bool(r, "ensures clause");
        clause_ = Clause::body;
        check_stmts(op.body);
        op_ = nullptr;
    }

    void check_equality(EqualityDecl& eq) {
        op_ = nullptr;
        eq_ = &eq;
        clause_ = Clause::equality;
        if (eq.state_type != spec_.state.name) {
            error(eq.span, "state-equality predicate compares '" + eq.state_type + "', but the state type is '" +
                               spec_.state.name + "'");
        }
        if (eq.lhs == eq.rhs) error(eq.span, "state-equality predicate parameters must have distinct names");
        expect_bool(eq.body, "state-equality predicate");
        eq_ = nullptr;
    }

    void expect_bool(Expr& e, std::string_view what) {
        const Type t = infer(e);
        if (t != Type::boolean && t != Type::error) {
            error(e.span, std::string(what) + " must be a formula, found " + std::string(to_string(t)));
        }
    }

    void check_stmts(std::vector<Stmt>& body) {
        for (auto& s : body) check_stmt(s);
    }

    void check_stmt(Stmt& s) {
        switch (s.kind) {
            case StmtKind::skip:
                return;
            case StmtKind::if_then_else: {
                const Type c = infer(s.value);
                if (c != Type::boolean && c != Type::error) {
                    error(s.value.span, "if condition must be bool, found " + std::string(to_string(c)));
                }
                check_stmts(s.then_body);
                check_stmts(s.else_body);
                return;
            }
            case StmtKind::assign:
                check_assign(s);
                return;
        }
    }

    void check_assign(Stmt& s) {
        const Type value = infer(s.value);
        Expr& target = s.target;
        const bool field_target = target.kind == ExprKind::field;
        const bool cell_target = target.kind == ExprKind::index && target.kids[0].kind == ExprKind::field;
        if (!field_target && !cell_target) {
            infer(target);
            error(s.span, "assignment target must be a state field `s.f` or an array cell `s.f[i]`");
            return;
        }
        const Type lhs = infer(target);
        if (lhs == Type::error || value == Type::error) return;
        if (lhs != value) {
            const Expr& f = field_target ? target : target.kids[0];
            error(s.span, "cannot assign " + std::string(to_string(value)) + " to " +
                              (field_target ? "field '" : "an element of field '") + f.name + "' of type " +
                              std::string(to_string(lhs)));
        }
        if (lhs == Type::int_array && value == Type::int_array) return;
    }

    Type resolve_var(Expr& e) {
        for (int d = static_cast<int>(bound_.size()) - 1; d >= 0; --d) {
            if (bound_[static_cast<std::size_t>(d)] == e.name) {
                e.ref = {RefKind::bound, d};
                return Type::integer;
            }
        }
        if (op_ != nullptr) {
            const int i = op_->param_index(e.name);
            if (i >= 0) {
                const auto& p = op_->params[static_cast<std::size_t>(i)];
                if (p.type.kind == Type::state) {
                    e.ref = {RefKind::state_var, 0};
                    return Type::state;
                }
                e.ref = {RefKind::param, i};
                return p.type.kind;
            }
        }
        if (eq_ != nullptr) {
            if (e.name == eq_->lhs) {
                e.ref = {RefKind::state_var, 0};
                return Type::state;
            }
            if (e.name == eq_->rhs) {
                e.ref = {RefKind::state_var, 1};
                return Type::state;
            }
        }
        const int f = spec_.state.field_index(e.name);
        if (f >= 0 && clause_ == Clause::invariant) {
            e.ref = {RefKind::field, f};
            return spec_.state.fields[static_cast<std::size_t>(f)].type.kind;
        }
        if (f >= 0) {
            error(e.span, "unknown identifier '" + e.name + "'; state fields are accessed through the state "
                          "parameter, e.g. `s." + e.name + "`");
        } else {
            error(e.span, "unknown identifier '" + e.name + "' in " + std::string(clause_name(clause_)));
        }
        return Type::error;
    }

    Type infer(Expr& e) {
        e.type = infer_inner(e);
        if (e.type == Type::state && !state_value_allowed_) {
            error(e.span, "the state '" + e.name + "' cannot be used as a value; access one of its fields");
            e.type = Type::error;
        }
        return e.type;
    }

    Type infer_state_base(Expr& e) {
        state_value_allowed_ = true;
        const Type t = infer(e);
        state_value_allowed_ = false;
        return t;
    }

    static bool bad(Type t) { return t == Type::error; }

    Type expect(Expr& e, Type want, std::string_view context) {
        const Type t = infer(e);
        if (bad(t)) return t;
        if (t != want) {
            error(e.span, std::string(context) + " expects " + std::string(to_string(want)) + ", found " +
                              std::string(to_string(t)));
            return Type::error;
        }
        return t;
    }

    Type infer_inner(Expr& e) {
        switch (e.kind) {
            case ExprKind::int_lit:  return Type::integer;
            case ExprKind::bool_lit: return Type::boolean;
            case ExprKind::var:      return resolve_var(e);
            case ExprKind::field: {
                Expr& base = e.kids[0];
                const Type bt = infer_state_base(base);
                if (bad(bt)) return Type::error;
                if (bt != Type::state) {
                    error(e.span, "field access on a non-state value");
                    return Type::error;
                }
                const int f = spec_.state.field_index(e.name);
                if (f < 0) {
                    error(e.span, "state type '" + spec_.state.name + "' has no field '" + e.name + "'");
                    return Type::error;
                }
                e.ref = {RefKind::field, f};
                return spec_.state.fields[static_cast<std::size_t>(f)].type.kind;
            }
            case ExprKind::index: {
                const Type a = expect(e.kids[0], Type::int_array, "indexing");
                const Type i = expect(e.kids[1], Type::integer, "an array index");
                return bad(a) || bad(i) ? Type::error : Type::integer;
            }
            case ExprKind::length:
                return bad(expect(e.kids[0], Type::int_array, "length")) ? Type::error : Type::integer;
            case ExprKind::old: {
                if (clause_ != Clause::ensures_clause) {
                    error(e.span, "`old` may only appear in ensures clauses, not in " +
                                      std::string(clause_name(clause_)));
                    infer(e.kids[0]);
                    return Type::error;
                }
                if (inside_old_) {
                    error(e.span, "nested `old`");
                    return Type::error;
                }
                inside_old_ = true;
                const Type t = infer(e.kids[0]);
                inside_old_ = false;
                return t;
            }
            case ExprKind::unary:
                if (e.unary == UnaryOp::neg) {
                    return bad(expect(e.kids[0], Type::integer, "unary '-'")) ? Type::error : Type::integer;
                }
                return bad(expect(e.kids[0], Type::boolean, "'not'")) ? Type::error : Type::boolean;
            case ExprKind::binary:
                return infer_binary(e);
            case ExprKind::quant:
                return infer_quant(e);
            case ExprKind::array_eq: {
                const Type a = expect(e.kids[0], Type::int_array, "array_eq");
                const Type b = expect(e.kids[1], Type::int_array, "array_eq");
                return bad(a) || bad(b) ? Type::error : Type::boolean;
            }
        }
        return Type::error;
    }

    Type infer_binary(Expr& e) {
        const std::string op = "'" + std::string(spelling(e.binary)) + "'";
        switch (e.binary) {
            case BinaryOp::add:
            case BinaryOp::sub:
            case BinaryOp::mul: {
                const Type a = expect(e.kids[0], Type::integer, op);
                const Type b = expect(e.kids[1], Type::integer, op);
                return bad(a) || bad(b) ? Type::error : Type::integer;
            }
            case BinaryOp::lt:
            case BinaryOp::le:
            case BinaryOp::gt:
            case BinaryOp::ge: {
                const Type a = expect(e.kids[0], Type::integer, op);
                const Type b = expect(e.kids[1], Type::integer, op);
                return bad(a) || bad(b) ? Type::error : Type::boolean;
            }
            case BinaryOp::eq:
            case BinaryOp::neq: {
                const Type a = infer(e.kids[0]);
                const Type b = infer(e.kids[1]);
                if (bad(a) || bad(b)) return Type::error;
                if (a == Type::int_array || b == Type::int_array) {
                    error(e.span, op + " compares scalars only; use `array_eq a b` for arrays");
                    return Type::error;
                }
                if (a != b) {
                    error(e.span, op + " between " + std::string(to_string(a)) + " and " +
                                      std::string(to_string(b)));
                    return Type::error;
                }
                return Type::boolean;
            }
            case BinaryOp::logical_and:
            case BinaryOp::logical_or:
            case BinaryOp::implies: {
                const Type a = expect(e.kids[0], Type::boolean, op);
                const Type b = expect(e.kids[1], Type::boolean, op);
                return bad(a) || bad(b) ? Type::error : Type::boolean;
            }
        }
        return Type::error;
    }

    Type infer_quant(Expr& e) {
        bool ok = true;
        if (e.over_array) {
            ok = !bad(expect(e.kids[0], Type::int_array, "a quantifier over array indices"));
        } else {
            ok = !bad(expect(e.kids[0], Type::integer, "a quantifier range bound"));
            ok = !bad(expect(e.kids[1], Type::integer, "a quantifier range bound")) && ok;
        }
        const int depth = static_cast<int>(bound_.size());
        bound_.push_back(e.name);
        Expr& body = e.kids.back();
        ok = !bad(expect(body, Type::boolean, "a quantifier body")) && ok;
        bound_.pop_back();
        if (ok && !references_bound(body, depth)) {
            error(e.span, "quantified variable '" + e.name + "' is not used in the body");
            return Type::error;
        }
        return ok ? Type::boolean : Type::error;
    }

    SpecAst& spec_;
    std::vector<Diagnostic> diags_;
    Clause clause_ = Clause::invariant;
    const OperationDecl* op_ = nullptr;
    const EqualityDecl* eq_ = nullptr;
    std::vector<std::string> bound_;
    bool inside_old_ = false;
    bool state_value_allowed_ = false;
};

}  // namespace

TypedSpec typecheck(SpecAst ast) {
    Checker(ast).run();
    TypedSpec typed;
    typed.fingerprint = sha256_hex(print_spec(ast));
    typed.ast = std::move(ast);
    return typed;
}

}  // namespace cise
