#include "incq/frontend.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace incq {

namespace {

void push_unique(std::vector<std::string> &xs, const std::string &x) {
    if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
}

} // namespace

std::vector<std::string> query_vars(const QuerySpec &q) {
    std::vector<std::string> vars;
    for (const auto &p : q.params) push_unique(vars, p);
    for (const auto &c : q.clauses) {
        if (c.kind == Clause::Kind::Membership) {
            push_unique(vars, c.var);
            push_unique(vars, c.selector.root);
        } else {
            std::vector<std::string> cs;
            collect_vars(c.cond, cs);
            for (auto &v : cs) push_unique(vars, v);
        }
    }
    std::vector<std::string> rs;
    collect_vars(q.result, rs);
    for (auto &v : rs) push_unique(vars, v);
    return vars;
}

std::vector<std::string> unreachable_vars(const QuerySpec &q,
                                          const std::vector<std::string> &params) {
    std::unordered_set<std::string> reachable(params.begin(), params.end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto &c : q.clauses) {
            if (c.kind != Clause::Kind::Membership) continue;
            if (reachable.count(c.selector.root) && !reachable.count(c.var)) {
                reachable.insert(c.var);
                changed = true;
            }
        }
    }
    std::vector<std::string> out;
    for (const auto &v : query_vars(q))
        if (!reachable.count(v)) out.push_back(v);
    return out;
}

DemandCheck validate_demand_params(const QuerySpec &q) {
    DemandCheck dc;
    dc.unreachable = unreachable_vars(q, q.demand_params);
    dc.ok = dc.unreachable.empty();
    return dc;
}

namespace {

void check_query(const QuerySpec &q, std::vector<FrontendError> &errors) {
    std::unordered_set<std::string> params(q.params.begin(), q.params.end());
    if (params.size() != q.params.size())
        errors.push_back({q.pos, "query " + q.name + ": duplicate parameter"});
    std::unordered_set<std::string> dps(q.demand_params.begin(), q.demand_params.end());
    if (dps.size() != q.demand_params.size())
        errors.push_back({q.pos, "query " + q.name + ": duplicate demand parameter"});
    for (const auto &dp : q.demand_params)
        if (!params.count(dp))
            errors.push_back({q.pos, "query " + q.name + ": demand parameter '" + dp +
                                         "' is not a parameter"});
    auto unreachable = check_well_formed(q);
    if (!unreachable.empty()) {
        std::string list;
        for (size_t i = 0; i < unreachable.size(); ++i)
            list += (i ? ", " : "") + unreachable[i];
        errors.push_back({q.pos, "query " + q.name + " is not well-formed; unreachable: " + list});
        return;
    }
    auto dc = validate_demand_params(q);
    if (!dc.ok) {
        std::string list;
        for (size_t i = 0; i < dc.unreachable.size(); ++i)
            list += (i ? ", " : "") + dc.unreachable[i];
        errors.push_back({q.pos, "query " + q.name + ": insufficient demand parameters; unreachable: " + list});
    }
}

} // namespace

LoadResult validate_script(Script script) {
    LoadResult res;
    std::vector<FrontendError> errors;
    std::unordered_set<std::string> qnames;
    for (const auto &q : script.queries) {
        if (!qnames.insert(q.name).second)
            errors.push_back({q.pos, "duplicate query name " + q.name});
        check_query(q, errors);
    }
    std::unordered_set<std::string> bound;
    for (const auto &op : script.trace) {
        auto need_bound = [&](const std::string &v, SourcePos pos) {
            if (!bound.count(v))
                errors.push_back({pos, "unbound trace variable '" + v + "'"});
        };
        auto need_bound_expr = [&](const ExprPtr &e, SourcePos pos) {
            std::vector<std::string> vs;
            collect_vars(e, vs);
            for (const auto &v : vs) need_bound(v, pos);
        };
        switch (op.kind) {
            case TraceOp::Kind::NewObject:
            case TraceOp::Kind::NewSet: bound.insert(op.var); break;
            case TraceOp::Kind::FieldAssign:
                need_bound(op.var, op.pos);
                need_bound_expr(op.value, op.pos);
                break;
            case TraceOp::Kind::SetAdd:
            case TraceOp::Kind::SetDel:
                need_bound(op.var, op.pos);
                need_bound_expr(op.value, op.pos);
                break;
            case TraceOp::Kind::DemandAdd:
            case TraceOp::Kind::DemandDel:
            case TraceOp::Kind::Ask:
            case TraceOp::Kind::AssertResult: {
                const QuerySpec *q = script.find_query(op.query);
                if (!q) {
                    errors.push_back({op.pos, "unknown query '" + op.query + "'"});
                    break;
                }
                size_t want = (op.kind == TraceOp::Kind::DemandAdd || op.kind == TraceOp::Kind::DemandDel)
                                  ? q->demand_params.size()
                                  : q->params.size();
                if (op.args.size() != want)
                    errors.push_back({op.pos, "arity mismatch for " + op.query + ": got " +
                                                  std::to_string(op.args.size()) + ", want " +
                                                  std::to_string(want)});
                for (const auto &a : op.args) need_bound_expr(a, op.pos);
                break;
            }
        }
    }
    res.errors = std::move(errors);
    if (res.errors.empty()) res.script = std::move(script);
    return res;
}

LoadResult load_program(const std::string &source) {
    ParseResult pr = parse_program(source);
    if (!pr.ok()) {
        LoadResult res;
        res.syntax_errors = std::move(pr.errors);
        return res;
    }
    return validate_script(std::move(*pr.script));
}

std::string LoadResult::describe() const {
    std::ostringstream os;
    for (const auto &e : syntax_errors) os << "syntax error at " << e.to_string() << "\n";
    for (const auto &e : errors)
        os << "error at " << e.pos.line << ":" << e.pos.col << ": " << e.message << "\n";
    return os.str();
}

} // namespace incq
