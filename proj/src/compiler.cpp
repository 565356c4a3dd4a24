#include "incq/compiler.hpp"

#include <map>
#include <stdexcept>

namespace incq {

Mode mode_from_string(const std::string &s) {
    if (s == "orig") return Mode::Orig;
    if (s == "inc") return Mode::Inc;
    if (s == "fil") return Mode::Fil;
    if (s == "fil-osq") return Mode::FilOsq;
    throw std::invalid_argument("unknown mode: " + s);
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Orig: return "orig";
        case Mode::Inc: return "inc";
        case Mode::Fil: return "fil";
        case Mode::FilOsq: return "fil-osq";
    }
    return "?";
}

std::vector<UpdateKind> script_update_kinds(const Script &script) {
    std::vector<UpdateKind> kinds;
    auto push = [&kinds](UpdateKind k) {
        for (const auto &e : kinds)
            if (e.key() == k.key()) return;
        kinds.push_back(std::move(k));
    };
    std::map<std::pair<std::string, std::string>, int> assigns;
    for (const auto &op : script.trace)
        if (op.kind == TraceOp::Kind::FieldAssign) assigns[{op.var, op.field}]++;

    for (const auto &op : script.trace) {
        switch (op.kind) {
            case TraceOp::Kind::FieldAssign: {
                push({RelId::field(op.field), true});
                if (assigns[{op.var, op.field}] > 1) push({RelId::field(op.field), false});
                break;
            }
            case TraceOp::Kind::SetAdd: push({RelId::member(), true}); break;
            case TraceOp::Kind::SetDel: push({RelId::member(), false}); break;
            case TraceOp::Kind::DemandAdd: push({RelId::demand(op.query), true}); break;
            case TraceOp::Kind::DemandDel: push({RelId::demand(op.query), false}); break;
            default: break;
        }
    }
    return kinds;
}

namespace {

bool contains_in_test(const ExprPtr &e) {
    if (!e) return false;
    if (e->kind == Expr::Kind::InTest) return true;
    for (const auto &c : e->children)
        if (contains_in_test(c)) return true;
    return false;
}

/// Membership tests inside conditions or results read set contents, so they
/// are not functions of the variable values and cannot be maintained
/// incrementally; memberships belong in clauses. Naive evaluation still
/// supports them.
void reject_membership_tests(const RelationalQuery &rq) {
    bool found = contains_in_test(rq.result);
    for (const auto &c : rq.conditions) found = found || contains_in_test(c);
    if (found)
        throw std::invalid_argument(
            "query " + rq.name +
            ": membership tests in conditions are not incrementalizable; "
            "write a membership clause instead");
}

} // namespace

std::vector<CompiledQuery> compile_script(const Script &script, const CompileOptions &opts) {
    std::vector<CompiledQuery> out;
    if (opts.mode == Mode::Orig) return out;
    std::vector<UpdateKind> kinds = script_update_kinds(script);
    for (const auto &q : script.queries) {
        CompiledQuery cq;
        cq.spec = q;
        cq.rq = lower_query(q);
        reject_membership_tests(cq.rq);
        cq.mplan = opts.mode == Mode::Inc
                       ? plan_incremental(cq.rq, opts.hints)
                       : plan_filtered(cq.rq, opts.hints, opts.mode == Mode::FilOsq);
        cq.oplan = lower_plan(cq.mplan);
        if (!opts.no_count_elim) {
            std::vector<UpdateKind> mine;
            for (const auto &k : kinds) {
                if (k.rel.kind == RelId::Kind::Demand && k.rel.name != q.name) continue;
                mine.push_back(k);
            }
            eliminate_counts(cq.oplan, cq.rq, mine);
            cq.mplan.result_counted = cq.oplan.result_counted;
        }
        out.push_back(std::move(cq));
    }
    return out;
}

} // namespace incq
