#include "incq/parser.hpp"

#include <cctype>
#include <unordered_set>

namespace incq {

namespace {

enum class Tok {
    Ident,
    Int,
    Str,
    Punct, // ( ) { } , : . = and multi-char comparison ops
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int64_t int_val = 0;
    SourcePos pos;
};

const std::unordered_set<std::string> kKeywords = {
    "query", "demand", "undemand", "new", "newset", "add", "del",
    "ask", "assert", "in", "and", "or", "not", "true", "false",
};

class Lexer {
public:
    Lexer(const std::string &src, std::vector<SyntaxError> &errors)
        : src_(src), errors_(errors) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            if (at_end()) break;
            SourcePos pos{line_, col_};
            char c = peek();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string id;
                while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
                    id += advance();
                out.push_back({Tok::Ident, std::move(id), 0, pos});
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                int64_t v = 0;
                while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
                    v = v * 10 + (advance() - '0');
                out.push_back({Tok::Int, "", v, pos});
            } else if (c == '"') {
                advance();
                std::string s;
                bool closed = false;
                while (!at_end()) {
                    char d = advance();
                    if (d == '"') {
                        closed = true;
                        break;
                    }
                    if (d == '\\' && !at_end()) {
                        char e = advance();
                        switch (e) {
                            case 'n': s += '\n'; break;
                            case 't': s += '\t'; break;
                            default: s += e; break;
                        }
                    } else {
                        s += d;
                    }
                }
                if (!closed) errors_.push_back({pos, "unterminated string literal"});
                out.push_back({Tok::Str, std::move(s), 0, pos});
            } else {
                std::string p(1, advance());
                if ((p == "=" || p == "!" || p == "<" || p == ">") && !at_end() && peek() == '=')
                    p += advance();
                static const std::unordered_set<std::string> valid = {
                    "(", ")", "{", "}", ",", ":", ".", "=", "==", "!=", "<", "<=", ">", ">=", "+", "-"};
                if (!valid.count(p)) {
                    errors_.push_back({pos, "unexpected character '" + p + "'"});
                    continue;
                }
                out.push_back({Tok::Punct, std::move(p), 0, pos});
            }
        }
        out.push_back({Tok::End, "", 0, {line_, col_}});
        return out;
    }

private:
    bool at_end() const { return i_ >= src_.size(); }
    char peek() const { return src_[i_]; }

    char advance() {
        char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (!at_end()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && i_ + 1 < src_.size() && src_[i_ + 1] == '/') {
                while (!at_end() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    const std::string &src_;
    std::vector<SyntaxError> &errors_;
    size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    Parser(std::vector<Token> toks, std::vector<SyntaxError> &errors)
        : toks_(std::move(toks)), errors_(errors) {}

    Script run() {
        Script script;
        while (!at(Tok::End)) {
            size_t before = p_;
            if (is_kw("query")) {
                if (auto q = parse_query()) script.queries.push_back(std::move(*q));
            } else {
                if (auto op = parse_trace_op()) script.trace.push_back(std::move(*op));
            }
            if (p_ == before) synchronize(); // no progress: skip to next plausible statement
        }
        return script;
    }

private:
    const Token &cur() const { return toks_[p_]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool at_punct(const std::string &p) const { return at(Tok::Punct) && cur().text == p; }
    bool is_kw(const std::string &k) const { return at(Tok::Ident) && cur().text == k; }

    Token take() { return toks_[p_ == toks_.size() - 1 ? p_ : p_++]; }

    bool eat_punct(const std::string &p) {
        if (at_punct(p)) {
            take();
            return true;
        }
        return false;
    }

    bool eat_kw(const std::string &k) {
        if (is_kw(k)) {
            take();
            return true;
        }
        return false;
    }

    void error(const std::string &msg) { errors_.push_back({cur().pos, msg}); }

    bool expect_punct(const std::string &p) {
        if (eat_punct(p)) return true;
        error("expected '" + p + "'");
        return false;
    }

    std::optional<std::string> expect_ident() {
        if (at(Tok::Ident) && !kKeywords.count(cur().text)) return take().text;
        error("expected identifier");
        return std::nullopt;
    }

    void synchronize() {
        // Skip ahead to a token that can start an item.
        while (!at(Tok::End)) {
            if (at(Tok::Ident) &&
                (kKeywords.count(cur().text) || (toks_[p_ + 1].kind == Tok::Punct &&
                                                 (toks_[p_ + 1].text == "." || toks_[p_ + 1].text == "="))))
                return;
            take();
        }
    }

    std::vector<std::string> parse_ident_list_paren() {
        std::vector<std::string> out;
        if (!expect_punct("(")) return out;
        if (eat_punct(")")) return out;
        do {
            if (auto id = expect_ident())
                out.push_back(*id);
            else
                break;
        } while (eat_punct(","));
        expect_punct(")");
        return out;
    }

    std::optional<QuerySpec> parse_query() {
        QuerySpec q;
        q.pos = cur().pos;
        eat_kw("query");
        auto name = expect_ident();
        if (!name) return std::nullopt;
        q.name = *name;
        q.params = parse_ident_list_paren();
        if (eat_kw("demand")) {
            q.demand_explicit = true;
            q.demand_params = parse_ident_list_paren();
        } else {
            q.demand_params = q.params;
        }
        expect_punct(":");
        expect_punct("{");
        q.result = parse_expr();
        expect_punct(":");
        if (!at_punct("}")) {
            do {
                q.clauses.push_back(parse_clause());
            } while (eat_punct(","));
        }
        expect_punct("}");
        if (!q.result) return std::nullopt;
        return q;
    }

    Clause parse_clause() {
        // Membership when the clause is exactly `ident in selector`; anything
        // else is a condition expression (which may itself use `in` as a test).
        SourcePos pos = cur().pos;
        if (at(Tok::Ident) && !kKeywords.count(cur().text) && toks_[p_ + 1].kind == Tok::Ident &&
            toks_[p_ + 1].text == "in") {
            size_t save = p_;
            std::string var = take().text;
            take(); // in
            auto sel = parse_selector();
            if (sel && (at_punct(",") || at_punct("}"))) {
                Clause c;
                c.kind = Clause::Kind::Membership;
                c.var = var;
                c.selector = *sel;
                c.pos = pos;
                return c;
            }
            p_ = save; // not a plain membership; reparse as expression
        }
        Clause c;
        c.kind = Clause::Kind::Condition;
        c.cond = parse_expr();
        c.pos = pos;
        if (!c.cond) c.cond = Expr::bool_lit(true, pos);
        return c;
    }

    std::optional<Selector> parse_selector() {
        auto root = expect_ident();
        if (!root) return std::nullopt;
        Selector s;
        s.root = *root;
        s.pos = cur().pos;
        while (at_punct(".")) {
            take();
            auto f = expect_ident();
            if (!f) return std::nullopt;
            s.fields.push_back(*f);
        }
        return s;
    }

    // Expression grammar: or > and > not > cmp/in > add/sub > neg > postfix > primary.
    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr l = parse_and();
        while (l && eat_kw("or")) {
            ExprPtr r = parse_and();
            if (!r) return nullptr;
            l = Expr::logical(Expr::Kind::Or, {l, r}, l->pos);
        }
        return l;
    }

    ExprPtr parse_and() {
        ExprPtr l = parse_not();
        while (l && eat_kw("and")) {
            ExprPtr r = parse_not();
            if (!r) return nullptr;
            l = Expr::logical(Expr::Kind::And, {l, r}, l->pos);
        }
        return l;
    }

    ExprPtr parse_not() {
        if (is_kw("not")) {
            SourcePos pos = cur().pos;
            take();
            ExprPtr e = parse_not();
            if (!e) return nullptr;
            return Expr::logical(Expr::Kind::Not, {e}, pos);
        }
        return parse_cmp();
    }

    ExprPtr parse_cmp() {
        ExprPtr l = parse_additive();
        if (!l) return nullptr;
        if (at(Tok::Punct)) {
            const std::string &op = cur().text;
            if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=") {
                take();
                ExprPtr r = parse_additive();
                if (!r) return nullptr;
                return Expr::cmp(op, l, r, l->pos);
            }
        }
        if (is_kw("in")) {
            take();
            ExprPtr r = parse_additive();
            if (!r) return nullptr;
            return Expr::in_test(l, r, l->pos);
        }
        return l;
    }

    ExprPtr parse_additive() {
        ExprPtr l = parse_unary();
        while (l && at(Tok::Punct) && (cur().text == "+" || cur().text == "-")) {
            bool add = take().text == "+";
            ExprPtr r = parse_unary();
            if (!r) return nullptr;
            l = Expr::arith(add ? Expr::Kind::Add : Expr::Kind::Sub, {l, r}, l->pos);
        }
        return l;
    }

    ExprPtr parse_unary() {
        if (at_punct("-")) {
            SourcePos pos = cur().pos;
            take();
            ExprPtr e = parse_unary();
            if (!e) return nullptr;
            if (e->kind == Expr::Kind::IntLit) return Expr::int_lit(-e->int_val, pos);
            return Expr::arith(Expr::Kind::Neg, {e}, pos);
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_primary();
        while (e && at_punct(".")) {
            take();
            auto f = expect_ident();
            if (!f) return nullptr;
            e = Expr::field(e, *f, e->pos);
        }
        return e;
    }

    ExprPtr parse_primary() {
        SourcePos pos = cur().pos;
        if (at(Tok::Int)) return Expr::int_lit(take().int_val, pos);
        if (at(Tok::Str)) return Expr::str_lit(take().text, pos);
        if (eat_kw("true")) return Expr::bool_lit(true, pos);
        if (eat_kw("false")) return Expr::bool_lit(false, pos);
        if (at(Tok::Ident) && !kKeywords.count(cur().text)) return Expr::var(take().text, pos);
        if (eat_punct("(")) {
            ExprPtr first = parse_expr();
            if (!first) return nullptr;
            if (eat_punct(")")) return first;
            std::vector<ExprPtr> elems{first};
            while (eat_punct(",")) {
                ExprPtr e = parse_expr();
                if (!e) return nullptr;
                elems.push_back(e);
            }
            expect_punct(")");
            return Expr::tuple(std::move(elems), pos);
        }
        error("expected expression");
        return nullptr;
    }

    std::vector<ExprPtr> parse_arg_tuple() {
        std::vector<ExprPtr> args;
        if (!expect_punct("(")) return args;
        if (eat_punct(")")) return args;
        do {
            ExprPtr e = parse_expr();
            if (!e) break;
            args.push_back(e);
        } while (eat_punct(","));
        expect_punct(")");
        return args;
    }

    /// Converts a literal-only expression to a Value; nullopt otherwise.
    std::optional<Value> literal_value(const ExprPtr &e) {
        switch (e->kind) {
            case Expr::Kind::IntLit: return Value::integer(e->int_val);
            case Expr::Kind::StrLit: return Value::str(e->str_val);
            case Expr::Kind::BoolLit: return Value::boolean(e->bool_val);
            case Expr::Kind::TupleCtor: {
                ValueVec elems;
                for (const auto &c : e->children) {
                    auto v = literal_value(c);
                    if (!v) return std::nullopt;
                    elems.push_back(*v);
                }
                return Value::tuple(std::move(elems));
            }
            default: return std::nullopt;
        }
    }

    std::optional<TraceOp> parse_trace_op() {
        TraceOp op;
        op.pos = cur().pos;
        if (eat_kw("new")) {
            op.kind = TraceOp::Kind::NewObject;
            auto v = expect_ident();
            if (!v) return std::nullopt;
            op.var = *v;
            return op;
        }
        if (eat_kw("newset")) {
            op.kind = TraceOp::Kind::NewSet;
            auto v = expect_ident();
            if (!v) return std::nullopt;
            op.var = *v;
            return op;
        }
        if (is_kw("add") || is_kw("del")) {
            bool is_add = cur().text == "add";
            take();
            op.kind = is_add ? TraceOp::Kind::SetAdd : TraceOp::Kind::SetDel;
            auto v = expect_ident();
            if (!v) return std::nullopt;
            op.var = *v;
            op.value = parse_expr();
            if (!op.value) return std::nullopt;
            return op;
        }
        if (is_kw("demand") || is_kw("undemand")) {
            bool is_add = cur().text == "demand";
            take();
            op.kind = is_add ? TraceOp::Kind::DemandAdd : TraceOp::Kind::DemandDel;
            auto q = expect_ident();
            if (!q) return std::nullopt;
            op.query = *q;
            op.args = parse_arg_tuple();
            return op;
        }
        if (eat_kw("ask")) {
            op.kind = TraceOp::Kind::Ask;
            auto q = expect_ident();
            if (!q) return std::nullopt;
            op.query = *q;
            op.args = parse_arg_tuple();
            return op;
        }
        if (eat_kw("assert")) {
            op.kind = TraceOp::Kind::AssertResult;
            auto q = expect_ident();
            if (!q) return std::nullopt;
            op.query = *q;
            op.args = parse_arg_tuple();
            expect_punct("==");
            expect_punct("{");
            if (!at_punct("}")) {
                do {
                    ExprPtr e = parse_expr();
                    if (!e) return std::nullopt;
                    auto v = literal_value(e);
                    if (!v) {
                        errors_.push_back({e->pos, "expected literal in assert set"});
                        return std::nullopt;
                    }
                    op.expected.push_back(*v);
                } while (eat_punct(","));
            }
            expect_punct("}");
            return op;
        }
        // Field assignment: ident.field = expr
        if (at(Tok::Ident) && !kKeywords.count(cur().text)) {
            auto v = expect_ident();
            if (!v) return std::nullopt;
            op.kind = TraceOp::Kind::FieldAssign;
            op.var = *v;
            if (!expect_punct(".")) return std::nullopt;
            auto f = expect_ident();
            if (!f) return std::nullopt;
            op.field = *f;
            if (!expect_punct("=")) return std::nullopt;
            op.value = parse_expr();
            if (!op.value) return std::nullopt;
            return op;
        }
        error("expected statement");
        return std::nullopt;
    }

    std::vector<Token> toks_;
    std::vector<SyntaxError> &errors_;
    size_t p_ = 0;
};

} // namespace

ParseResult parse_program(const std::string &source) {
    ParseResult res;
    Lexer lexer(source, res.errors);
    Parser parser(lexer.run(), res.errors);
    Script script = parser.run();
    if (res.errors.empty()) res.script = std::move(script);
    return res;
}

} // namespace incq
