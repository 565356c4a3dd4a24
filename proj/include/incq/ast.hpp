#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "incq/value.hpp"

namespace incq {

struct SourcePos {
    int line = 0;
    int col = 0;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Pure expression over query variables and selectors. Evaluation is a
/// function of the referenced variable and selector values; an evaluation
/// error (missing field, incompatible operands) skips the binding.
struct Expr {
    enum class Kind {
        Var,
        FieldSel, // child.field
        IntLit,
        StrLit,
        BoolLit,
        Cmp,   // op in {==, !=, <, <=, >, >=}
        And,
        Or,
        Not,
        Add,
        Sub,
        Neg,
        TupleCtor,
        InTest, // membership used as a test inside a condition
    };

    Kind kind;
    std::string name;       // Var name, FieldSel field, Cmp operator
    int64_t int_val = 0;
    bool bool_val = false;
    std::string str_val;
    std::vector<ExprPtr> children;
    SourcePos pos;

    static ExprPtr var(std::string n, SourcePos p = {});
    static ExprPtr field(ExprPtr base, std::string f, SourcePos p = {});
    static ExprPtr int_lit(int64_t v, SourcePos p = {});
    static ExprPtr str_lit(std::string s, SourcePos p = {});
    static ExprPtr bool_lit(bool b, SourcePos p = {});
    static ExprPtr cmp(std::string op, ExprPtr l, ExprPtr r, SourcePos p = {});
    static ExprPtr logical(Kind k, std::vector<ExprPtr> kids, SourcePos p = {});
    static ExprPtr arith(Kind k, std::vector<ExprPtr> kids, SourcePos p = {});
    static ExprPtr tuple(std::vector<ExprPtr> kids, SourcePos p = {});
    static ExprPtr in_test(ExprPtr elem, ExprPtr set, SourcePos p = {});
};

bool expr_equal(const ExprPtr &a, const ExprPtr &b);
std::string expr_to_string(const ExprPtr &e);

/// Collects the variables an expression reads (selector roots included).
void collect_vars(const ExprPtr &e, std::vector<std::string> &out);

/// variable . field . field ...
struct Selector {
    std::string root;
    std::vector<std::string> fields;
    SourcePos pos;

    std::string to_string() const {
        std::string s = root;
        for (const auto &f : fields) s += "." + f;
        return s;
    }

    bool operator==(const Selector &o) const { return root == o.root && fields == o.fields; }
};

struct Clause {
    enum class Kind { Membership, Condition };
    Kind kind;
    // Membership: var in selector
    std::string var;
    Selector selector;
    // Condition
    ExprPtr cond;
    SourcePos pos;
};

struct QuerySpec {
    std::string name;
    std::vector<std::string> params;        // p1..pk, ordered
    std::vector<std::string> demand_params; // dp1..dpj, sublist of params
    bool demand_explicit = false;           // false: defaulted to all params
    std::vector<Clause> clauses;            // unordered as a set
    ExprPtr result;
    SourcePos pos;
};

struct TraceOp {
    enum class Kind {
        NewObject,
        NewSet,
        FieldAssign, // var.field = expr
        SetAdd,      // add var expr
        SetDel,      // del var expr
        DemandAdd,   // demand q (args)
        DemandDel,   // undemand q (args)
        Ask,         // ask q (args)
        AssertResult // assert q (args) == { literals }
    };

    Kind kind;
    std::string var;   // NewObject/NewSet/FieldAssign/SetAdd/SetDel target
    std::string field; // FieldAssign
    ExprPtr value;     // FieldAssign rhs / SetAdd / SetDel element
    std::string query;
    std::vector<ExprPtr> args;
    ValueVec expected; // AssertResult literal set
    SourcePos pos;
};

struct Script {
    std::vector<QuerySpec> queries;
    std::vector<TraceOp> trace;
    // Index into trace where measurement starts; ops before it are setup.
    size_t setup_len = 0;

    const QuerySpec *find_query(const std::string &name) const {
        for (const auto &q : queries)
            if (q.name == name) return &q;
        return nullptr;
    }
};

std::string clause_to_string(const Clause &c);
std::string query_to_string(const QuerySpec &q);
std::string trace_op_to_string(const TraceOp &op);
std::string script_to_string(const Script &s);

} // namespace incq
