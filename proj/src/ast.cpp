#include <cise/ast.hpp>

#include <sstream>

namespace cise {

std::string_view to_string(Type t) {
    switch (t) {
        case Type::unknown:   return "unknown";
        case Type::integer:   return "int";
        case Type::boolean:   return "bool";
        case Type::int_array: return "array int";
        case Type::state:     return "state";
        case Type::error:     return "<error>";
    }
    return "?";
}

std::string_view spelling(UnaryOp op) {
    return op == UnaryOp::neg ? "-" : "not";
}

std::string_view spelling(BinaryOp op) {
    switch (op) {
        case BinaryOp::add:         return "+";
        case BinaryOp::sub:         return "-";
        case BinaryOp::mul:         return "*";
        case BinaryOp::eq:          return "=";
        case BinaryOp::neq:         return "<>";
        case BinaryOp::lt:          return "<";
        case BinaryOp::le:          return "<=";
        case BinaryOp::gt:          return ">";
        case BinaryOp::ge:          return ">=";
        case BinaryOp::logical_and: return "/\\";
        case BinaryOp::logical_or:  return "\\/";
        case BinaryOp::implies:     return "->";
    }
    return "?";
}

std::string_view spelling(Quantifier q) {
    return q == Quantifier::forall ? "forall" : "exists";
}

Expr Expr::int_lit(Int v, Span s) {
    Expr e;
    e.kind = ExprKind::int_lit;
    e.value = v;
    e.span = s;
    return e;
}

Expr Expr::bool_lit(bool v, Span s) {
    Expr e;
    e.kind = ExprKind::bool_lit;
    e.value = v ? 1 : 0;
    e.span = s;
    return e;
}

Expr Expr::var(std::string name, Span s) {
    Expr e;
    e.kind = ExprKind::var;
    e.name = std::move(name);
    e.span = s;
    return e;
}

Expr Expr::field(Expr state, std::string field, Span s) {
    Expr e;
    e.kind = ExprKind::field;
    e.name = std::move(field);
    e.kids.push_back(std::move(state));
    e.span = s;
    return e;
}

Expr Expr::index(Expr array, Expr idx, Span s) {
    Expr e;
    e.kind = ExprKind::index;
    e.kids.push_back(std::move(array));
    e.kids.push_back(std::move(idx));
    e.span = s;
    return e;
}

Expr Expr::length(Expr array, Span s) {
    Expr e;
    e.kind = ExprKind::length;
    e.kids.push_back(std::move(array));
    e.span = s;
    return e;
}

Expr Expr::old(Expr inner, Span s) {
    Expr e;
    e.kind = ExprKind::old;
    e.kids.push_back(std::move(inner));
    e.span = s;
    return e;
}

Expr Expr::unary_op(UnaryOp op, Expr operand, Span s) {
    Expr e;
    e.kind = ExprKind::unary;
    e.unary = op;
    e.kids.push_back(std::move(operand));
    e.span = s;
    return e;
}

Expr Expr::binary_op(BinaryOp op, Expr lhs, Expr rhs, Span s) {
    Expr e;
    e.kind = ExprKind::binary;
    e.binary = op;
    e.kids.push_back(std::move(lhs));
    e.kids.push_back(std::move(rhs));
    e.span = s;
    return e;
}

Expr Expr::range_quant(Quantifier q, std::string var, Expr lo, Expr hi, Expr body, Span s) {
    Expr e;
    e.kind = ExprKind::quant;
    e.quant = q;
    e.name = std::move(var);
    e.kids.push_back(std::move(lo));
    e.kids.push_back(std::move(hi));
    e.kids.push_back(std::move(body));
    e.span = s;
    return e;
}

Expr Expr::array_quant(Quantifier q, std::string var, Expr array, Expr body, Span s) {
    Expr e;
    e.kind = ExprKind::quant;
    e.quant = q;
    e.over_array = true;
    e.name = std::move(var);
    e.kids.push_back(std::move(array));
    e.kids.push_back(std::move(body));
    e.span = s;
    return e;
}

Expr Expr::array_equal(Expr a, Expr b, Span s) {
    Expr e;
    e.kind = ExprKind::array_eq;
    e.kids.push_back(std::move(a));
    e.kids.push_back(std::move(b));
    e.span = s;
    return e;
}

Expr conjoin(std::vector<Expr> parts) {
    if (parts.empty()) {
        Expr t = Expr::bool_lit(true);
        t.type = Type::boolean;
        return t;
    }
    Expr acc = std::move(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i) {
        acc = Expr::binary_op(BinaryOp::logical_and, std::move(acc), std::move(parts[i]));
        acc.type = Type::boolean;
    }
    return acc;
}

int StateDecl::field_index(std::string_view field) const {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i].name == field) return static_cast<int>(i);
    }
    return -1;
}

int OperationDecl::param_index(std::string_view param) const {
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].name == param) return static_cast<int>(i);
    }
    return -1;
}

int SpecAst::operation_index(std::string_view op) const {
    for (std::size_t i = 0; i < operations.size(); ++i) {
        if (operations[i].name == op) return static_cast<int>(i);
    }
    return -1;
}

namespace {

void dump(std::ostringstream& out, const Expr& e) {
    switch (e.kind) {
        case ExprKind::int_lit:  out << e.value; return;
        case ExprKind::bool_lit: out << (e.value != 0 ? "true" : "false"); return;
        case ExprKind::var:      out << e.name; return;
        case ExprKind::field:
            out << "(. ";
            dump(out, e.kids[0]);
            out << ' ' << e.name << ')';
            return;
        case ExprKind::index:    out << "([] "; break;
        case ExprKind::length:   out << "(length "; break;
        case ExprKind::old:      out << "(old "; break;
        case ExprKind::unary:    out << '(' << spelling(e.unary) << ' '; break;
        case ExprKind::binary:   out << '(' << spelling(e.binary) << ' '; break;
        case ExprKind::quant:
            out << '(' << spelling(e.quant) << (e.over_array ? "-in " : "-range ") << e.name << ' ';
            break;
        case ExprKind::array_eq: out << "(array_eq "; break;
    }
    for (std::size_t i = 0; i < e.kids.size(); ++i) {
        if (i != 0) out << ' ';
        dump(out, e.kids[i]);
    }
    out << ')';
}

void dump(std::ostringstream& out, const TypeExpr& t) {
    if (t.kind == Type::state) {
        out << "(named " << t.name << ')';
    } else {
        out << '"' << to_string(t.kind) << '"';
    }
}

void dump(std::ostringstream& out, const std::vector<Stmt>& body);

void dump(std::ostringstream& out, const Stmt& s) {
    switch (s.kind) {
        case StmtKind::skip:
            out << "(skip)";
            return;
        case StmtKind::assign:
            out << "(<- ";
            dump(out, s.target);
            out << ' ';
            dump(out, s.value);
            out << ')';
            return;
        case StmtKind::if_then_else:
            out << "(if ";
            dump(out, s.value);
            out << ' ';
            dump(out, s.then_body);
            if (s.has_else) {
                out << ' ';
                dump(out, s.else_body);
            }
            out << ')';
            return;
    }
}

void dump(std::ostringstream& out, const std::vector<Stmt>& body) {
    out << "(seq";
    for (const auto& s : body) {
        out << ' ';
        dump(out, s);
    }
    out << ')';
}

}  // namespace

std::string to_sexpr(const Expr& e) {
    std::ostringstream out;
    dump(out, e);
    return out.str();
}

std::string to_sexpr(const SpecAst& spec) {
    std::ostringstream out;
    out << "(spec";
    if (spec.module_name) out << " (module " << *spec.module_name << ')';
    out << "\n (state " << spec.state.name;
    for (const auto& f : spec.state.fields) {
        out << " (" << f.name << ' ';
        dump(out, f.type);
        out << ')';
    }
    if (spec.state.invariant) {
        out << " (invariant ";
        dump(out, *spec.state.invariant);
        out << ')';
    }
    out << ')';
    for (const auto& op : spec.operations) {
        out << "\n (op " << op.name << " (params";
        for (const auto& p : op.params) {
            out << " (" << p.name << ' ';
            dump(out, p.type);
            out << ')';
        }
        out << ") (requires";
        for (const auto& r : op.requires_clauses) {
            out << ' ';
            dump(out, r);
        }
        out << ") (ensures";
        for (const auto& r : op.ensures_clauses) {
            out << ' ';
            dump(out, r);
        }
        out << ") ";
        dump(out, op.body);
        out << ')';
    }
    if (spec.equality) {
        const auto& eq = *spec.equality;
        out << "\n (state_eq " << eq.name << ' ' << eq.lhs << ' ' << eq.rhs << ' ' << eq.state_type << ' ';
        dump(out, eq.body);
        out << ')';
    }
    for (const auto& c : spec.conflicts) {
        out << "\n (conflict " << c.first << ' ' << c.second << ')';
    }
    out << ')';
    return out.str();
}

}  // namespace cise
