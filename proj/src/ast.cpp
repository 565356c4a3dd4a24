#include "incq/ast.hpp"

#include <algorithm>
#include <sstream>

namespace incq {

static ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

ExprPtr Expr::var(std::string n, SourcePos p) {
    Expr e;
    e.kind = Kind::Var;
    e.name = std::move(n);
    e.pos = p;
    return make(std::move(e));
}

ExprPtr Expr::field(ExprPtr base, std::string f, SourcePos p) {
    Expr e;
    e.kind = Kind::FieldSel;
    e.name = std::move(f);
    e.children = {std::move(base)};
    e.pos = p;
    return make(std::move(e));
}

ExprPtr Expr::int_lit(int64_t v, SourcePos p) {
    Expr e;
    e.kind = Kind::IntLit;
    e.int_val = v;
    e.pos = p;
    return make(std::move(e));
}

ExprPtr Expr::str_lit(std::string s, SourcePos p) {
    Expr e;
    e.kind = Kind::StrLit;
    e.str_val = std::move(s);
    e.pos = p;
    return make(std::move(e));
}

ExprPtr Expr::bool_lit(bool b, SourcePos p) {
    Expr e;
    e.kind = Kind::BoolLit;
    e.bool_val = b;
    e.pos = p;
    return make(std::move(e));
}

ExprPtr Expr::cmp(std::string op, ExprPtr l, ExprPtr r, SourcePos p) {
    Expr e;
    e.kind = Kind::Cmp;
    e.name = std::move(op);
    e.children = {std::move(l), std::move(r)};
    e.pos = p;
    return make(std::move(e));
}

ExprPtr Expr::logical(Kind k, std::vector<ExprPtr> kids, SourcePos p) {
    Expr e;
    e.kind = k;
    e.children = std::move(kids);
    e.pos = p;
    return make(std::move(e));
}

ExprPtr Expr::arith(Kind k, std::vector<ExprPtr> kids, SourcePos p) {
    Expr e;
    e.kind = k;
    e.children = std::move(kids);
    e.pos = p;
    return make(std::move(e));
}

ExprPtr Expr::tuple(std::vector<ExprPtr> kids, SourcePos p) {
    Expr e;
    e.kind = Kind::TupleCtor;
    e.children = std::move(kids);
    e.pos = p;
    return make(std::move(e));
}

ExprPtr Expr::in_test(ExprPtr elem, ExprPtr set, SourcePos p) {
    Expr e;
    e.kind = Kind::InTest;
    e.children = {std::move(elem), std::move(set)};
    e.pos = p;
    return make(std::move(e));
}

bool expr_equal(const ExprPtr &a, const ExprPtr &b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->name != b->name || a->int_val != b->int_val ||
        a->bool_val != b->bool_val || a->str_val != b->str_val ||
        a->children.size() != b->children.size())
        return false;
    for (size_t i = 0; i < a->children.size(); ++i)
        if (!expr_equal(a->children[i], b->children[i])) return false;
    return true;
}

namespace {

int precedence(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::Or: return 1;
        case Expr::Kind::And: return 2;
        case Expr::Kind::Not: return 3;
        case Expr::Kind::Cmp:
        case Expr::Kind::InTest: return 4;
        case Expr::Kind::Add:
        case Expr::Kind::Sub: return 5;
        case Expr::Kind::Neg: return 6;
        default: return 7;
    }
}

void print_expr(const ExprPtr &e, std::ostream &os, int parent_prec) {
    int prec = precedence(e->kind);
    bool paren = prec < parent_prec;
    if (paren) os << "(";
    switch (e->kind) {
        case Expr::Kind::Var: os << e->name; break;
        case Expr::Kind::FieldSel:
            print_expr(e->children[0], os, 7);
            os << "." << e->name;
            break;
        case Expr::Kind::IntLit: os << e->int_val; break;
        case Expr::Kind::StrLit: os << '"' << e->str_val << '"'; break;
        case Expr::Kind::BoolLit: os << (e->bool_val ? "true" : "false"); break;
        case Expr::Kind::Cmp:
            print_expr(e->children[0], os, prec + 1);
            os << " " << e->name << " ";
            print_expr(e->children[1], os, prec + 1);
            break;
        case Expr::Kind::And:
            print_expr(e->children[0], os, prec);
            os << " and ";
            print_expr(e->children[1], os, prec + 1);
            break;
        case Expr::Kind::Or:
            print_expr(e->children[0], os, prec);
            os << " or ";
            print_expr(e->children[1], os, prec + 1);
            break;
        case Expr::Kind::Not:
            os << "not ";
            print_expr(e->children[0], os, prec);
            break;
        case Expr::Kind::Add:
        case Expr::Kind::Sub:
            print_expr(e->children[0], os, prec);
            os << (e->kind == Expr::Kind::Add ? " + " : " - ");
            print_expr(e->children[1], os, prec + 1);
            break;
        case Expr::Kind::Neg:
            os << "-";
            print_expr(e->children[0], os, prec);
            break;
        case Expr::Kind::TupleCtor:
            os << "(";
            for (size_t i = 0; i < e->children.size(); ++i) {
                if (i) os << ", ";
                print_expr(e->children[i], os, 0);
            }
            os << ")";
            break;
        case Expr::Kind::InTest:
            print_expr(e->children[0], os, prec + 1);
            os << " in ";
            print_expr(e->children[1], os, prec + 1);
            break;
    }
    if (paren) os << ")";
}

} // namespace

std::string expr_to_string(const ExprPtr &e) {
    std::ostringstream os;
    print_expr(e, os, 0);
    return os.str();
}

void collect_vars(const ExprPtr &e, std::vector<std::string> &out) {
    if (!e) return;
    if (e->kind == Expr::Kind::Var) {
        if (std::find(out.begin(), out.end(), e->name) == out.end()) out.push_back(e->name);
        return;
    }
    for (const auto &c : e->children) collect_vars(c, out);
}

std::string clause_to_string(const Clause &c) {
    if (c.kind == Clause::Kind::Membership) return c.var + " in " + c.selector.to_string();
    return expr_to_string(c.cond);
}

static std::string join(const std::vector<std::string> &xs, const char *sep) {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) s += sep;
        s += xs[i];
    }
    return s;
}

std::string query_to_string(const QuerySpec &q) {
    std::ostringstream os;
    os << "query " << q.name << "(" << join(q.params, ", ") << ")";
    if (q.demand_explicit) os << " demand(" << join(q.demand_params, ", ") << ")";
    os << ": { " << expr_to_string(q.result) << " :";
    for (size_t i = 0; i < q.clauses.size(); ++i)
        os << (i ? ", " : " ") << clause_to_string(q.clauses[i]);
    os << " }";
    return os.str();
}

std::string trace_op_to_string(const TraceOp &op) {
    std::ostringstream os;
    auto args = [&]() {
        os << "(";
        for (size_t i = 0; i < op.args.size(); ++i) {
            if (i) os << ", ";
            os << expr_to_string(op.args[i]);
        }
        os << ")";
    };
    switch (op.kind) {
        case TraceOp::Kind::NewObject: os << "new " << op.var; break;
        case TraceOp::Kind::NewSet: os << "newset " << op.var; break;
        case TraceOp::Kind::FieldAssign:
            os << op.var << "." << op.field << " = " << expr_to_string(op.value);
            break;
        case TraceOp::Kind::SetAdd: os << "add " << op.var << " " << expr_to_string(op.value); break;
        case TraceOp::Kind::SetDel: os << "del " << op.var << " " << expr_to_string(op.value); break;
        case TraceOp::Kind::DemandAdd:
            os << "demand " << op.query << " ";
            args();
            break;
        case TraceOp::Kind::DemandDel:
            os << "undemand " << op.query << " ";
            args();
            break;
        case TraceOp::Kind::Ask:
            os << "ask " << op.query << " ";
            args();
            break;
        case TraceOp::Kind::AssertResult: {
            os << "assert " << op.query << " ";
            args();
            os << " == { ";
            for (size_t i = 0; i < op.expected.size(); ++i) {
                if (i) os << ", ";
                os << op.expected[i].to_string();
            }
            os << " }";
            break;
        }
    }
    return os.str();
}

std::string script_to_string(const Script &s) {
    std::ostringstream os;
    for (const auto &q : s.queries) os << query_to_string(q) << "\n";
    for (const auto &op : s.trace) os << trace_op_to_string(op) << "\n";
    return os.str();
}

} // namespace incq
