#include <cise/frontend.hpp>

#include <charconv>
#include <set>
#include <sstream>
#include <utility>

namespace cise {

namespace {

enum class Tok {
    eof, ident, number, tag,
    lparen, rparen, lbrace, rbrace, lbracket, rbracket,
    colon, semicolon, dot, dotdot,
    assign_eq,  // '=' (both definition and equality; context decides)
    neq, lt, le, gt, ge,
    plus, minus, star,
    conj, disj, arrow, larrow,
    // keywords
    kw_module, kw_type, kw_invariant, kw_let, kw_requires, kw_ensures, kw_predicate, kw_conflict,
    kw_forall, kw_exists, kw_in, kw_if, kw_then, kw_else, kw_skip, kw_old, kw_length, kw_array_eq,
    kw_true, kw_false, kw_not, kw_int, kw_bool, kw_array,
};

struct Keyword {
    std::string_view text;
    Tok tok;
};

constexpr Keyword keywords[] = {
    {"module", Tok::kw_module}, {"type", Tok::kw_type}, {"invariant", Tok::kw_invariant},
    {"let", Tok::kw_let}, {"requires", Tok::kw_requires}, {"ensures", Tok::kw_ensures},
    {"predicate", Tok::kw_predicate}, {"conflict", Tok::kw_conflict}, {"forall", Tok::kw_forall},
    {"exists", Tok::kw_exists}, {"in", Tok::kw_in}, {"if", Tok::kw_if}, {"then", Tok::kw_then},
    {"else", Tok::kw_else}, {"skip", Tok::kw_skip}, {"old", Tok::kw_old}, {"length", Tok::kw_length},
    {"array_eq", Tok::kw_array_eq}, {"true", Tok::kw_true}, {"false", Tok::kw_false},
    {"not", Tok::kw_not}, {"int", Tok::kw_int}, {"bool", Tok::kw_bool}, {"array", Tok::kw_array},
};

std::string_view describe(Tok t) {
    switch (t) {
        case Tok::eof:        return "end of input";
        case Tok::ident:      return "identifier";
        case Tok::number:     return "integer literal";
        case Tok::tag:        return "tag";
        case Tok::lparen:     return "'('";
        case Tok::rparen:     return "')'";
        case Tok::lbrace:     return "'{'";
        case Tok::rbrace:     return "'}'";
        case Tok::lbracket:   return "'['";
        case Tok::rbracket:   return "']'";
        case Tok::colon:      return "':'";
        case Tok::semicolon:  return "';'";
        case Tok::dot:        return "'.'";
        case Tok::dotdot:     return "'..'";
        case Tok::assign_eq:  return "'='";
        case Tok::neq:        return "'<>'";
        case Tok::lt:         return "'<'";
        case Tok::le:         return "'<='";
        case Tok::gt:         return "'>'";
        case Tok::ge:         return "'>='";
        case Tok::plus:       return "'+'";
        case Tok::minus:      return "'-'";
        case Tok::star:       return "'*'";
        case Tok::conj:       return "'/\\'";
        case Tok::disj:       return "'\\/'";
        case Tok::arrow:      return "'->'";
        case Tok::larrow:     return "'<-'";
        default: break;
    }
    for (const auto& k : keywords) {
        if (k.tok == t) return k.text;
    }
    return "token";
}

struct Token {
    Tok kind = Tok::eof;
    std::string text;
    Span span;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.span.begin = pos();
            if (at_end()) {
                t.kind = Tok::eof;
                t.span.end = pos();
                out.push_back(std::move(t));
                return out;
            }
            lex_one(t);
            t.span.end = pos();
            out.push_back(std::move(t));
        }
    }

private:
    [[nodiscard]] bool at_end() const { return i_ >= src_.size(); }
    [[nodiscard]] char peek(std::size_t k = 0) const { return i_ + k < src_.size() ? src_[i_ + k] : '\0'; }
    [[nodiscard]] SourcePos pos() const { return {line_, col_}; }

    void advance(std::size_t n = 1) {
        for (std::size_t k = 0; k < n && !at_end(); ++k) {
            if (src_[i_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++i_;
        }
    }

    void skip_space() {
        for (;;) {
            while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) advance();
            if (peek() == '/' && peek(1) == '/') {
                while (!at_end() && peek() != '\n') advance();
                continue;
            }
            return;
        }
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw SpecError(SpecErrorKind::parse, {Diagnostic{{pos(), pos()}, Severity::error, msg}});
    }

    static bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9') || c == '\''; }

    void lex_one(Token& t) {
        const char c = peek();
        if (ident_start(c)) {
            std::size_t start = i_;
            while (ident_char(peek())) advance();
            t.text = std::string(src_.substr(start, i_ - start));
            t.kind = Tok::ident;
            for (const auto& k : keywords) {
                if (k.text == t.text) t.kind = k.tok;
            }
            return;
        }
        if (c >= '0' && c <= '9') {
            std::size_t start = i_;
            while (peek() >= '0' && peek() <= '9') advance();
            t.text = std::string(src_.substr(start, i_ - start));
            t.kind = Tok::number;
            return;
        }
        if (c == '[' && peek(1) == '@') {
            advance(2);
            std::size_t start = i_;
            while (ident_char(peek())) advance();
            t.text = std::string(src_.substr(start, i_ - start));
            if (peek() != ']') fail("unterminated tag, expected ']'");
            advance();
            t.kind = Tok::tag;
            return;
        }
        auto two = [&](char a, char b) { return c == a && peek(1) == b; };
        if (two('.', '.')) { advance(2); t.kind = Tok::dotdot; return; }
        if (two('<', '>')) { advance(2); t.kind = Tok::neq; return; }
        if (two('<', '=')) { advance(2); t.kind = Tok::le; return; }
        if (two('<', '-')) { advance(2); t.kind = Tok::larrow; return; }
        if (two('>', '=')) { advance(2); t.kind = Tok::ge; return; }
        if (two('-', '>')) { advance(2); t.kind = Tok::arrow; return; }
        if (two('/', '\\')) { advance(2); t.kind = Tok::conj; return; }
        if (two('\\', '/')) { advance(2); t.kind = Tok::disj; return; }
        advance();
        switch (c) {
            case '(': t.kind = Tok::lparen; return;
            case ')': t.kind = Tok::rparen; return;
            case '{': t.kind = Tok::lbrace; return;
            case '}': t.kind = Tok::rbrace; return;
            case '[': t.kind = Tok::lbracket; return;
            case ']': t.kind = Tok::rbracket; return;
            case ':': t.kind = Tok::colon; return;
            case ';': t.kind = Tok::semicolon; return;
            case '.': t.kind = Tok::dot; return;
            case '=': t.kind = Tok::assign_eq; return;
            case '<': t.kind = Tok::lt; return;
            case '>': t.kind = Tok::gt; return;
            case '+': t.kind = Tok::plus; return;
            case '-': t.kind = Tok::minus; return;
            case '*': t.kind = Tok::star; return;
            default: break;
        }
        std::ostringstream msg;
        msg << "unexpected character '" << c << "'";
        throw SpecError(SpecErrorKind::parse,
                        {Diagnostic{{t.span.begin, t.span.begin}, Severity::error, msg.str()}});
    }

    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    SpecAst run() {
        SpecAst spec;
        bool have_state = false;
        Span first_state_span;
        if (at(Tok::kw_module)) {
            next();
            spec.module_name = expect_ident("module name");
        }
        while (!at(Tok::eof)) {
            switch (cur().kind) {
                case Tok::kw_type: {
                    StateDecl decl = parse_type_decl();
                    if (have_state) {
                        throw SpecError(SpecErrorKind::duplicate_tag,
                                        {Diagnostic{decl.span, Severity::error,
                                                    "second [@state] type '" + decl.name +
                                                        "'; exactly one state record is allowed"},
                                         Diagnostic{first_state_span, Severity::note,
                                                    "first [@state] type declared here"}});
                    }
                    have_state = true;
                    first_state_span = decl.span;
                    spec.state = std::move(decl);
                    break;
                }
                case Tok::kw_let:
                    spec.operations.push_back(parse_operation());
                    break;
                case Tok::kw_predicate: {
                    EqualityDecl eq = parse_predicate();
                    if (spec.equality) {
                        throw SpecError(SpecErrorKind::duplicate_tag,
                                        {Diagnostic{eq.span, Severity::error,
                                                    "second [@state_eq] predicate '" + eq.name +
                                                        "'; at most one is allowed"},
                                         Diagnostic{spec.equality->span, Severity::note,
                                                    "first [@state_eq] predicate declared here"}});
                    }
                    spec.equality = std::move(eq);
                    break;
                }
                case Tok::kw_conflict:
                    spec.conflicts.push_back(parse_conflict());
                    break;
                default:
                    fail_expected("a declaration ('type', 'let', 'predicate' or 'conflict')");
            }
        }
        if (!have_state) {
            throw SpecError(SpecErrorKind::missing_state_tag,
                            {Diagnostic{cur().span, Severity::error,
                                        "no type carries the [@state] tag; declare the replicated state "
                                        "as `type <name> [@state] = { ... }`"}});
        }
        std::vector<Diagnostic> dangling;
        for (const auto& c : spec.conflicts) {
            for (const auto* name : {&c.first, &c.second}) {
                if (spec.operation_index(*name) < 0) {
                    dangling.push_back(Diagnostic{c.span, Severity::error,
                                                  "conflict names unknown operation '" + *name + "'"});
                }
            }
        }
        if (!dangling.empty()) throw SpecError(SpecErrorKind::dangling_conflict, std::move(dangling));
        return spec;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& peek_tok(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool at(Tok t) const { return cur().kind == t; }
    Token next() {
        Token t = cur();
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    static std::string found(const Token& t) {
        switch (t.kind) {
            case Tok::ident:  return "identifier '" + t.text + "'";
            case Tok::number: return "integer '" + t.text + "'";
            case Tok::tag:    return "tag '[@" + t.text + "]'";
            default:          return std::string(describe(t.kind));
        }
    }

    [[noreturn]] void fail_expected(std::string_view what) const {
        std::ostringstream msg;
        msg << "expected " << what << ", found " << found(cur());
        throw SpecError(SpecErrorKind::parse, {Diagnostic{cur().span, Severity::error, msg.str()}});
    }

    Token expect(Tok t) {
        if (!at(t)) fail_expected(describe(t));
        return next();
    }

    std::string expect_ident(std::string_view what) {
        if (!at(Tok::ident)) fail_expected(what);
        return next().text;
    }

    static Span join(Span a, Span b) { return {a.begin, b.end}; }
    Span prev_span() const { return toks_[pos_ == 0 ? 0 : pos_ - 1].span; }

    TypeExpr parse_type() {
        TypeExpr t;
        if (at(Tok::kw_int)) {
            next();
            t.kind = Type::integer;
        } else if (at(Tok::kw_bool)) {
            next();
            t.kind = Type::boolean;
        } else if (at(Tok::kw_array)) {
            next();
            if (!at(Tok::kw_int)) fail_expected("'int' (only `array int` is supported)");
            next();
            t.kind = Type::int_array;
        } else if (at(Tok::ident)) {
            t.kind = Type::state;
            t.name = next().text;
        } else {
            fail_expected("a type ('int', 'bool', 'array int' or the state type name)");
        }
        return t;
    }

    StateDecl parse_type_decl() {
        StateDecl decl;
        Span start = expect(Tok::kw_type).span;
        decl.name = expect_ident("type name");
        if (!at(Tok::tag)) {
            throw SpecError(SpecErrorKind::parse,
                            {Diagnostic{cur().span, Severity::error,
                                        "only the replicated state record may be declared; expected "
                                        "[@state] after type name '" + decl.name + "'"}});
        }
        Token tag = next();
        if (tag.text != "state") {
            throw SpecError(SpecErrorKind::parse,
                            {Diagnostic{tag.span, Severity::error,
                                        "unknown type tag '[@" + tag.text + "]', expected [@state]"}});
        }
        expect(Tok::assign_eq);
        expect(Tok::lbrace);
        while (!at(Tok::rbrace)) {
            FieldDecl f;
            Token name = cur();
            f.name = expect_ident("field name");
            expect(Tok::colon);
            f.type = parse_type();
            f.span = join(name.span, prev_span());
            decl.fields.push_back(std::move(f));
            if (at(Tok::semicolon)) {
                next();
            } else if (!at(Tok::rbrace)) {
                fail_expected("';' or '}'");
            }
        }
        expect(Tok::rbrace);
        decl.span = join(start, prev_span());
        if (at(Tok::kw_invariant)) {
            next();
            expect(Tok::lbrace);
            record_vars_.clear();
            decl.invariant = parse_expr();
            expect(Tok::rbrace);
        }
        return decl;
    }

    void parse_param_group(std::vector<Param>& params) {
        expect(Tok::lparen);
        std::vector<Token> names;
        while (at(Tok::ident)) names.push_back(next());
        if (names.empty()) fail_expected("parameter name");
        expect(Tok::colon);
        TypeExpr t = parse_type();
        expect(Tok::rparen);
        for (auto& n : names) {
            params.push_back(Param{n.text, t, n.span});
        }
    }

    void set_record_vars(const std::vector<Param>& params) {
        record_vars_.clear();
        for (const auto& p : params) {
            if (p.type.kind == Type::state) record_vars_.insert(p.name);
        }
    }

    OperationDecl parse_operation() {
        OperationDecl op;
        Span start = expect(Tok::kw_let).span;
        op.name = expect_ident("operation name");
        while (at(Tok::lparen)) parse_param_group(op.params);
        if (op.params.empty()) fail_expected("'(' starting a parameter group");
        set_record_vars(op.params);
        for (;;) {
            if (at(Tok::kw_requires)) {
                next();
                expect(Tok::lbrace);
                op.requires_clauses.push_back(parse_expr());
                expect(Tok::rbrace);
            } else if (at(Tok::kw_ensures)) {
                next();
                expect(Tok::lbrace);
                op.ensures_clauses.push_back(parse_expr());
                expect(Tok::rbrace);
            } else {
                break;
            }
        }
        if (!at(Tok::assign_eq)) fail_expected("'requires', 'ensures' or '=' before the body");
        next();
        op.body = parse_stmts();
        if (!at(Tok::eof) && !at(Tok::kw_let) && !at(Tok::kw_type) && !at(Tok::kw_predicate) &&
            !at(Tok::kw_conflict)) {
            fail_expected("';' or the next declaration");
        }
        op.span = join(start, prev_span());
        record_vars_.clear();
        return op;
    }

    std::vector<Stmt> parse_stmts() {
        std::vector<Stmt> out;
        out.push_back(parse_stmt());
        while (at(Tok::semicolon)) {
            next();
            out.push_back(parse_stmt());
        }
        return out;
    }

    std::vector<Stmt> parse_block() {
        expect(Tok::lbrace);
        std::vector<Stmt> body = parse_stmts();
        expect(Tok::rbrace);
        return body;
    }

    Stmt parse_stmt() {
        Stmt s;
        Span start = cur().span;
        if (at(Tok::kw_skip)) {
            next();
            s.kind = StmtKind::skip;
        } else if (at(Tok::kw_if)) {
            next();
            s.kind = StmtKind::if_then_else;
            s.value = parse_expr();
            expect(Tok::kw_then);
            s.then_body = parse_block();
            if (at(Tok::kw_else)) {
                next();
                s.has_else = true;
                s.else_body = parse_block();
            }
        } else if (at(Tok::ident)) {
            s.kind = StmtKind::assign;
            s.target = parse_postfix();
            expect(Tok::larrow);
            s.value = parse_expr();
        } else {
            fail_expected("a statement ('skip', 'if' or an assignment `s.f <- e`)");
        }
        s.span = join(start, prev_span());
        return s;
    }

    EqualityDecl parse_predicate() {
        EqualityDecl eq;
        Span start = expect(Tok::kw_predicate).span;
        eq.name = expect_ident("predicate name");
        if (!at(Tok::tag)) {
            throw SpecError(SpecErrorKind::parse,
                            {Diagnostic{cur().span, Severity::error,
                                        "only the state-equality predicate may be declared; expected "
                                        "[@state_eq] after predicate name '" + eq.name + "'"}});
        }
        Token tag = next();
        if (tag.text != "state_eq") {
            throw SpecError(SpecErrorKind::parse,
                            {Diagnostic{tag.span, Severity::error,
                                        "unknown predicate tag '[@" + tag.text + "]', expected [@state_eq]"}});
        }
        std::vector<Param> params;
        while (at(Tok::lparen)) parse_param_group(params);
        if (params.size() != 2) {
            throw SpecError(SpecErrorKind::parse,
                            {Diagnostic{join(start, prev_span()), Severity::error,
                                        "state-equality predicate takes exactly two parameters"}});
        }
        if (params[0].type.kind != Type::state || params[1].type.kind != Type::state ||
            params[0].type.name != params[1].type.name) {
            throw SpecError(SpecErrorKind::parse,
                            {Diagnostic{join(start, prev_span()), Severity::error,
                                        "state-equality predicate parameters must both have the state type"}});
        }
        eq.lhs = params[0].name;
        eq.rhs = params[1].name;
        eq.state_type = params[0].type.name;
        expect(Tok::assign_eq);
        set_record_vars(params);
        eq.body = parse_expr();
        record_vars_.clear();
        eq.span = join(start, prev_span());
        return eq;
    }

    ConflictDecl parse_conflict() {
        ConflictDecl c;
        Span start = expect(Tok::kw_conflict).span;
        c.first = expect_ident("operation name");
        c.second = expect_ident("operation name");
        c.span = join(start, prev_span());
        return c;
    }

    // ---- expressions, loosest to tightest ----

    Expr parse_expr() { return parse_implies(); }

    Expr parse_implies() {
        Expr lhs = parse_or();
        if (at(Tok::arrow)) {
            next();
            Expr rhs = parse_implies();
            Span s = join(lhs.span, rhs.span);
            return Expr::binary_op(BinaryOp::implies, std::move(lhs), std::move(rhs), s);
        }
        return lhs;
    }

    Expr parse_or() {
        Expr lhs = parse_and();
        while (at(Tok::disj)) {
            next();
            Expr rhs = parse_and();
            Span s = join(lhs.span, rhs.span);
            lhs = Expr::binary_op(BinaryOp::logical_or, std::move(lhs), std::move(rhs), s);
        }
        return lhs;
    }

    Expr parse_and() {
        Expr lhs = parse_not();
        while (at(Tok::conj)) {
            next();
            Expr rhs = parse_not();
            Span s = join(lhs.span, rhs.span);
            lhs = Expr::binary_op(BinaryOp::logical_and, std::move(lhs), std::move(rhs), s);
        }
        return lhs;
    }

    Expr parse_not() {
        if (at(Tok::kw_not)) {
            Span start = next().span;
            Expr operand = parse_not();
            Span s = join(start, operand.span);
            return Expr::unary_op(UnaryOp::logical_not, std::move(operand), s);
        }
        if (at(Tok::kw_forall) || at(Tok::kw_exists)) return parse_quant();
        return parse_cmp();
    }

    Expr parse_quant() {
        Token kw = next();
        const Quantifier q = kw.kind == Tok::kw_forall ? Quantifier::forall : Quantifier::exists;
        std::string var = expect_ident("quantified variable");
        if (!at(Tok::kw_in)) fail_expected("'in' (quantifiers range over `lo .. hi` or the indices of an array)");
        next();
        Expr first = parse_additive();
        if (at(Tok::dotdot)) {
            next();
            Expr hi = parse_additive();
            expect(Tok::dot);
            Expr body = parse_expr();
            Span s = join(kw.span, body.span);
            return Expr::range_quant(q, std::move(var), std::move(first), std::move(hi), std::move(body), s);
        }
        expect(Tok::dot);
        Expr body = parse_expr();
        Span s = join(kw.span, body.span);
        return Expr::array_quant(q, std::move(var), std::move(first), std::move(body), s);
    }

    Expr parse_cmp() {
        Expr lhs = parse_additive();
        BinaryOp op{};
        switch (cur().kind) {
            case Tok::assign_eq: op = BinaryOp::eq; break;
            case Tok::neq:       op = BinaryOp::neq; break;
            case Tok::lt:        op = BinaryOp::lt; break;
            case Tok::le:        op = BinaryOp::le; break;
            case Tok::gt:        op = BinaryOp::gt; break;
            case Tok::ge:        op = BinaryOp::ge; break;
            default:             return lhs;
        }
        next();
        Expr rhs = parse_additive();
        Span s = join(lhs.span, rhs.span);
        return Expr::binary_op(op, std::move(lhs), std::move(rhs), s);
    }

    Expr parse_additive() {
        Expr lhs = parse_mul();
        while (at(Tok::plus) || at(Tok::minus)) {
            const BinaryOp op = next().kind == Tok::plus ? BinaryOp::add : BinaryOp::sub;
            Expr rhs = parse_mul();
            Span s = join(lhs.span, rhs.span);
            lhs = Expr::binary_op(op, std::move(lhs), std::move(rhs), s);
        }
        return lhs;
    }

    Expr parse_mul() {
        Expr lhs = parse_unary();
        while (at(Tok::star)) {
            next();
            Expr rhs = parse_unary();
            Span s = join(lhs.span, rhs.span);
            lhs = Expr::binary_op(BinaryOp::mul, std::move(lhs), std::move(rhs), s);
        }
        return lhs;
    }

    Expr parse_unary() {
        if (at(Tok::minus)) {
            Span start = next().span;
            Expr operand = parse_unary();
            Span s = join(start, operand.span);
            return Expr::unary_op(UnaryOp::neg, std::move(operand), s);
        }
        return parse_app();
    }

    Expr parse_app() {
        if (at(Tok::kw_length)) {
            Span start = next().span;
            Expr arg = parse_postfix();
            Span s = join(start, arg.span);
            return Expr::length(std::move(arg), s);
        }
        if (at(Tok::kw_old)) {
            Span start = next().span;
            Expr arg = parse_postfix();
            Span s = join(start, arg.span);
            return Expr::old(std::move(arg), s);
        }
        if (at(Tok::kw_array_eq)) {
            Span start = next().span;
            Expr a = parse_postfix();
            Expr b = parse_postfix();
            Span s = join(start, b.span);
            return Expr::array_equal(std::move(a), std::move(b), s);
        }
        return parse_postfix();
    }

    Expr parse_postfix() {
        Expr e = parse_primary();
        while (at(Tok::lbracket)) {
            next();
            Expr idx = parse_expr();
            Token close = expect(Tok::rbracket);
            Span s = join(e.span, close.span);
            e = Expr::index(std::move(e), std::move(idx), s);
        }
        return e;
    }

    Expr parse_primary() {
        const Token& t = cur();
        switch (t.kind) {
            case Tok::number: {
                Int v = 0;
                auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
                if (ec != std::errc{}) {
                    throw SpecError(SpecErrorKind::parse,
                                    {Diagnostic{t.span, Severity::error, "integer literal out of range"}});
                }
                Span s = next().span;
                return Expr::int_lit(v, s);
            }
            case Tok::kw_true:
                return Expr::bool_lit(true, next().span);
            case Tok::kw_false:
                return Expr::bool_lit(false, next().span);
            case Tok::lparen: {
                next();
                Expr inner = parse_expr();
                expect(Tok::rparen);
                return inner;
            }
            case Tok::ident: {
                Token id = next();
                Expr v = Expr::var(id.text, id.span);
                // Records are flat, so `.` only ever follows a state-typed name.
                if (at(Tok::dot) && record_vars_.count(id.text) != 0 && peek_tok(1).kind == Tok::ident) {
                    next();
                    Token f = next();
                    return Expr::field(std::move(v), f.text, join(id.span, f.span));
                }
                return v;
            }
            default:
                fail_expected("an expression");
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::set<std::string, std::less<>> record_vars_;
};

}  // namespace

SpecAst parse_spec(std::string_view source) {
    return Parser(Lexer(source).run()).run();
}

TypedSpec load_spec(std::string_view source) {
    return typecheck(parse_spec(source));
}

}  // namespace cise
