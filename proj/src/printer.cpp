#include <cise/frontend.hpp>

#include <sstream>

namespace cise {

namespace {

// Binding strength, loosest first. Mirrors the recursive-descent levels of the parser.
enum Level : int {
    lvl_quant = 0,
    lvl_implies = 1,
    lvl_or = 2,
    lvl_and = 3,
    lvl_not = 4,
    lvl_cmp = 5,
    lvl_add = 6,
    lvl_mul = 7,
    lvl_neg = 8,
    lvl_app = 9,
    lvl_postfix = 10,
    lvl_atom = 11,
};

int level_of(const Expr& e) {
    switch (e.kind) {
        case ExprKind::int_lit:  return e.value < 0 ? lvl_neg : lvl_atom;
        case ExprKind::bool_lit:
        case ExprKind::var:
        case ExprKind::field:    return lvl_atom;
        case ExprKind::index:    return lvl_postfix;
        case ExprKind::length:
        case ExprKind::old:
        case ExprKind::array_eq: return lvl_app;
        case ExprKind::unary:    return e.unary == UnaryOp::neg ? lvl_neg : lvl_not;
        case ExprKind::quant:    return lvl_quant;
        case ExprKind::binary:
            switch (e.binary) {
                case BinaryOp::implies:     return lvl_implies;
                case BinaryOp::logical_or:  return lvl_or;
                case BinaryOp::logical_and: return lvl_and;
                case BinaryOp::add:
                case BinaryOp::sub:         return lvl_add;
                case BinaryOp::mul:         return lvl_mul;
                default:                    return lvl_cmp;
            }
    }
    return lvl_atom;
}

void print(std::ostringstream& out, const Expr& e, int ctx);

void print_inner(std::ostringstream& out, const Expr& e) {
    switch (e.kind) {
        case ExprKind::int_lit:
            if (e.value < 0) {
                out << '-' << static_cast<unsigned long long>(-(e.value + 1)) + 1ULL;
            } else {
                out << e.value;
            }
            return;
        case ExprKind::bool_lit:
            out << (e.value != 0 ? "true" : "false");
            return;
        case ExprKind::var:
            out << e.name;
            return;
        case ExprKind::field:
            print(out, e.kids[0], lvl_atom);
            out << '.' << e.name;
            return;
        case ExprKind::index:
            print(out, e.kids[0], lvl_postfix);
            out << '[';
            print(out, e.kids[1], lvl_quant);
            out << ']';
            return;
        case ExprKind::length:
            out << "length ";
            print(out, e.kids[0], lvl_postfix);
            return;
        case ExprKind::old:
            out << "old ";
            print(out, e.kids[0], lvl_postfix);
            return;
        case ExprKind::array_eq:
            out << "array_eq ";
            print(out, e.kids[0], lvl_postfix);
            out << ' ';
            print(out, e.kids[1], lvl_postfix);
            return;
        case ExprKind::unary:
            if (e.unary == UnaryOp::neg) {
                out << '-';
                print(out, e.kids[0], lvl_neg);
            } else {
                out << "not ";
                print(out, e.kids[0], lvl_not);
            }
            return;
        case ExprKind::quant:
            out << spelling(e.quant) << ' ' << e.name << " in ";
            if (e.over_array) {
                print(out, e.kids[0], lvl_add);
            } else {
                print(out, e.kids[0], lvl_add);
                out << " .. ";
                print(out, e.kids[1], lvl_add);
            }
            out << ". ";
            print(out, e.body(), lvl_quant);
            return;
        case ExprKind::binary: {
            const int me = level_of(e);
            int lhs_ctx = me;
            int rhs_ctx = me + 1;
            if (e.binary == BinaryOp::implies) {
                lhs_ctx = me + 1;
                rhs_ctx = me;
            } else if (me == lvl_cmp) {
                lhs_ctx = rhs_ctx = lvl_add;
            }
            print(out, e.kids[0], lhs_ctx);
            out << ' ' << spelling(e.binary) << ' ';
            print(out, e.kids[1], rhs_ctx);
            return;
        }
    }
}

void print(std::ostringstream& out, const Expr& e, int ctx) {
    // A quantifier's body extends to the right as far as possible, so one that
    // is not at the top of its context is always bracketed.
    const bool paren = level_of(e) < ctx;
    if (paren) out << '(';
    print_inner(out, e);
    if (paren) out << ')';
}

std::string type_text(const TypeExpr& t) {
    if (t.kind == Type::state) return t.name;
    return std::string(to_string(t.kind));
}

void print_stmts(std::ostringstream& out, const std::vector<Stmt>& body, int indent);

void print_stmt(std::ostringstream& out, const Stmt& s, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    switch (s.kind) {
        case StmtKind::skip:
            out << pad << "skip";
            return;
        case StmtKind::assign:
            out << pad;
            print(out, s.target, lvl_postfix);
            out << " <- ";
            print(out, s.value, lvl_quant);
            return;
        case StmtKind::if_then_else:
            out << pad << "if ";
            print(out, s.value, lvl_quant);
            out << " then {\n";
            print_stmts(out, s.then_body, indent + 2);
            out << '\n' << pad << '}';
            if (s.has_else) {
                out << " else {\n";
                print_stmts(out, s.else_body, indent + 2);
                out << '\n' << pad << '}';
            }
            return;
    }
}

void print_stmts(std::ostringstream& out, const std::vector<Stmt>& body, int indent) {
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (i != 0) out << ";\n";
        print_stmt(out, body[i], indent);
    }
}

}  // namespace

std::string print_expr(const Expr& e) {
    std::ostringstream out;
    print(out, e, lvl_quant);
    return out.str();
}

std::string print_spec(const SpecAst& spec) {
    std::ostringstream out;
    if (spec.module_name) out << "module " << *spec.module_name << "\n\n";
    out << "type " << spec.state.name << " [@state] = {";
    for (std::size_t i = 0; i < spec.state.fields.size(); ++i) {
        const auto& f = spec.state.fields[i];
        out << (i == 0 ? "\n" : ";\n") << "  " << f.name << " : " << type_text(f.type);
    }
    out << (spec.state.fields.empty() ? "}" : "\n}");
    if (spec.state.invariant) {
        out << "\ninvariant { ";
        print(out, *spec.state.invariant, lvl_quant);
        out << " }";
    }
    out << '\n';
    for (const auto& op : spec.operations) {
        out << "\nlet " << op.name;
        for (const auto& p : op.params) out << " (" << p.name << " : " << type_text(p.type) << ')';
        out << '\n';
        for (const auto& r : op.requires_clauses) {
            out << "  requires { ";
            print(out, r, lvl_quant);
            out << " }\n";
        }
        for (const auto& r : op.ensures_clauses) {
            out << "  ensures { ";
            print(out, r, lvl_quant);
            out << " }\n";
        }
        out << "=\n";
        print_stmts(out, op.body, 2);
        out << '\n';
    }
    if (spec.equality) {
        const auto& eq = *spec.equality;
        out << "\npredicate " << eq.name << " [@state_eq] (" << eq.lhs << ' ' << eq.rhs << " : " << eq.state_type
            << ") =\n  ";
        print(out, eq.body, lvl_quant);
        out << '\n';
    }
    if (!spec.conflicts.empty()) out << '\n';
    for (const auto& c : spec.conflicts) out << "conflict " << c.first << ' ' << c.second << '\n';
    return out.str();
}

std::string round_trip_print(const TypedSpec& spec) {
    return print_spec(spec.ast);
}

}  // namespace cise
