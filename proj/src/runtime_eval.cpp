#include "incq/runtime_eval.hpp"

#include <algorithm>
#include <cassert>

namespace incq {

namespace {

bool values_comparable_eq(const Value &a, const Value &b) {
    if (a.kind() == b.kind()) return true;
    // Object and set references share identity semantics; any two references
    // may be compared (and differ).
    return a.is_ref() && b.is_ref();
}

} // namespace

std::optional<Value> eval_expr(const ExprPtr &e, const VarLookup &vars, const Heap &heap,
                               OpCounters *counters) {
    switch (e->kind) {
        case Expr::Kind::Var: {
            const Value *v = vars(e->name);
            if (!v) return std::nullopt;
            return *v;
        }
        case Expr::Kind::FieldSel: {
            auto base = eval_expr(e->children[0], vars, heap, counters);
            if (!base) return std::nullopt;
            if (counters) ++counters->heap_reads;
            return heap.get_field(*base, e->name); // nullopt when missing or not an object
        }
        case Expr::Kind::IntLit: return Value::integer(e->int_val);
        case Expr::Kind::StrLit: return Value::str(e->str_val);
        case Expr::Kind::BoolLit: return Value::boolean(e->bool_val);
        case Expr::Kind::Cmp: {
            auto l = eval_expr(e->children[0], vars, heap, counters);
            auto r = eval_expr(e->children[1], vars, heap, counters);
            if (!l || !r) return std::nullopt;
            const std::string &op = e->name;
            if (op == "==" || op == "!=") {
                if (!values_comparable_eq(*l, *r)) return std::nullopt;
                bool eq = *l == *r;
                return Value::boolean(op == "==" ? eq : !eq);
            }
            bool lt, le;
            if (l->is_int() && r->is_int()) {
                lt = l->as_int() < r->as_int();
                le = l->as_int() <= r->as_int();
            } else if (l->is_str() && r->is_str()) {
                lt = l->as_str() < r->as_str();
                le = l->as_str() <= r->as_str();
            } else {
                return std::nullopt;
            }
            if (op == "<") return Value::boolean(lt);
            if (op == "<=") return Value::boolean(le);
            if (op == ">") return Value::boolean(!le);
            return Value::boolean(!lt);
        }
        case Expr::Kind::And: {
            auto l = eval_expr(e->children[0], vars, heap, counters);
            if (!l || !l->is_bool()) return std::nullopt;
            if (!l->as_bool()) return Value::boolean(false);
            auto r = eval_expr(e->children[1], vars, heap, counters);
            if (!r || !r->is_bool()) return std::nullopt;
            return *r;
        }
        case Expr::Kind::Or: {
            auto l = eval_expr(e->children[0], vars, heap, counters);
            if (!l || !l->is_bool()) return std::nullopt;
            if (l->as_bool()) return Value::boolean(true);
            auto r = eval_expr(e->children[1], vars, heap, counters);
            if (!r || !r->is_bool()) return std::nullopt;
            return *r;
        }
        case Expr::Kind::Not: {
            auto v = eval_expr(e->children[0], vars, heap, counters);
            if (!v || !v->is_bool()) return std::nullopt;
            return Value::boolean(!v->as_bool());
        }
        case Expr::Kind::Add:
        case Expr::Kind::Sub: {
            auto l = eval_expr(e->children[0], vars, heap, counters);
            auto r = eval_expr(e->children[1], vars, heap, counters);
            if (!l || !r || !l->is_int() || !r->is_int()) return std::nullopt;
            return Value::integer(e->kind == Expr::Kind::Add ? l->as_int() + r->as_int()
                                                             : l->as_int() - r->as_int());
        }
        case Expr::Kind::Neg: {
            auto v = eval_expr(e->children[0], vars, heap, counters);
            if (!v || !v->is_int()) return std::nullopt;
            return Value::integer(-v->as_int());
        }
        case Expr::Kind::TupleCtor: {
            ValueVec elems;
            for (const auto &c : e->children) {
                auto v = eval_expr(c, vars, heap, counters);
                if (!v) return std::nullopt;
                elems.push_back(std::move(*v));
            }
            return Value::tuple(std::move(elems));
        }
        case Expr::Kind::InTest: {
            auto elem = eval_expr(e->children[0], vars, heap, counters);
            auto set = eval_expr(e->children[1], vars, heap, counters);
            if (!elem || !set || !set->is_set()) return std::nullopt;
            if (counters) ++counters->heap_reads;
            return Value::boolean(heap.set_contains(*set, *elem));
        }
    }
    return std::nullopt;
}

namespace {

/// Nested-loop enumeration with skip semantics shared by the object-level
/// evaluator.
class NaiveObjectEval {
public:
    NaiveObjectEval(const QuerySpec &q, const Heap &heap, OpCounters *counters)
        : q_(q), heap_(heap), counters_(counters) {
        for (const auto &c : q.clauses)
            (c.kind == Clause::Kind::Membership ? memberships_ : conditions_).push_back(&c);
        cond_done_.assign(conditions_.size(), false);
        member_done_.assign(memberships_.size(), false);
    }

    ValueVec run(const ValueVec &args) {
        assert(args.size() == q_.params.size());
        for (size_t i = 0; i < args.size(); ++i) env_[q_.params[i]] = args[i];
        recurse();
        std::sort(out_.begin(), out_.end());
        out_.erase(std::unique(out_.begin(), out_.end()), out_.end());
        return out_;
    }

private:
    VarLookup lookup() {
        return [this](const std::string &n) -> const Value * {
            auto it = env_.find(n);
            return it == env_.end() ? nullptr : &it->second;
        };
    }

    bool expr_vars_bound(const ExprPtr &e) {
        std::vector<std::string> vs;
        collect_vars(e, vs);
        for (const auto &v : vs)
            if (!env_.count(v)) return false;
        return true;
    }

    /// Evaluates the selector with per-hop reads; nullopt skips the binding.
    std::optional<Value> eval_selector(const Selector &sel) {
        auto it = env_.find(sel.root);
        if (it == env_.end()) return std::nullopt;
        Value cur = it->second;
        for (const auto &f : sel.fields) {
            if (counters_) ++counters_->heap_reads;
            auto next = heap_.get_field(cur, f);
            if (!next) return std::nullopt;
            cur = *next;
        }
        return cur;
    }

    void recurse() {
        // Conditions whose variables are bound run first, in clause order.
        std::vector<size_t> checked;
        bool pruned = false;
        for (size_t i = 0; i < conditions_.size() && !pruned; ++i) {
            if (cond_done_[i] || !expr_vars_bound(conditions_[i]->cond)) continue;
            cond_done_[i] = true;
            checked.push_back(i);
            if (counters_) ++counters_->guard_tests;
            auto v = eval_expr(conditions_[i]->cond, lookup(), heap_, nullptr);
            if (!v || !v->is_bool() || !v->as_bool()) pruned = true;
        }
        if (!pruned) step();
        for (size_t i : checked) cond_done_[i] = false;
    }

    void step() {
        // First unprocessed membership whose selector root is bound.
        size_t pick = memberships_.size();
        for (size_t i = 0; i < memberships_.size(); ++i) {
            if (member_done_[i]) continue;
            if (env_.count(memberships_[i]->selector.root)) {
                pick = i;
                break;
            }
        }
        if (pick == memberships_.size()) {
            for (size_t i = 0; i < memberships_.size(); ++i)
                assert(member_done_[i] && "well-formed queries always make progress");
            emit();
            return;
        }

        const Clause *m = memberships_[pick];
        member_done_[pick] = true;
        auto set_val = eval_selector(m->selector);
        if (set_val && set_val->is_set()) {
            auto bound = env_.find(m->var);
            if (bound != env_.end()) {
                if (counters_) ++counters_->heap_reads;
                if (heap_.set_contains(*set_val, bound->second)) recurse();
            } else {
                heap_.set_elems(*set_val).for_each([&](const Value &elem) {
                    if (counters_) ++counters_->map_iterations;
                    env_[m->var] = elem;
                    recurse();
                    env_.erase(m->var);
                });
            }
        }
        member_done_[pick] = false;
    }

    void emit() {
        auto v = eval_expr(q_.result, lookup(), heap_, counters_);
        if (v) out_.push_back(std::move(*v));
    }

    const QuerySpec &q_;
    const Heap &heap_;
    OpCounters *counters_;
    std::vector<const Clause *> memberships_, conditions_;
    std::vector<bool> member_done_;
    std::vector<bool> cond_done_;
    std::unordered_map<std::string, Value> env_;
    ValueVec out_;
};

/// Clause-at-a-time enumeration over the virtual relations; used as the
/// lowering oracle and for brute-force derivation counting.
class NaiveRelationalEval {
public:
    NaiveRelationalEval(const RelationalQuery &rq, const Heap &heap, const DemandTuples &demand,
                        OpCounters *counters)
        : rq_(rq), heap_(heap), demand_(demand), counters_(counters) {
        clause_done_.assign(rq.rel_clauses.size(), false);
        cond_done_.assign(rq.conditions.size(), false);
    }

    void run(const std::optional<ValueVec> &args,
             const std::function<void(const std::unordered_map<std::string, Value> &)> &on_binding) {
        if (args) {
            assert(args->size() == rq_.params.size());
            for (size_t i = 0; i < args->size(); ++i) env_[rq_.params[i]] = (*args)[i];
        }
        on_binding_ = on_binding;
        recurse();
    }

private:
    VarLookup lookup() {
        return [this](const std::string &n) -> const Value * {
            auto it = env_.find(n);
            return it == env_.end() ? nullptr : &it->second;
        };
    }

    bool expr_vars_bound(const ExprPtr &e) {
        std::vector<std::string> vs;
        collect_vars(e, vs);
        for (const auto &v : vs)
            if (!env_.count(v)) return false;
        return true;
    }

    size_t unbound_count(const RelClause &cl) {
        size_t n = 0;
        for (const auto &v : cl.lhs)
            if (!env_.count(v)) ++n;
        return n;
    }

    void recurse() {
        std::vector<size_t> checked;
        bool pruned = false;
        for (size_t i = 0; i < rq_.conditions.size() && !pruned; ++i) {
            if (cond_done_[i] || !expr_vars_bound(rq_.conditions[i])) continue;
            cond_done_[i] = true;
            checked.push_back(i);
            if (counters_) ++counters_->guard_tests;
            auto v = eval_expr(rq_.conditions[i], lookup(), heap_, nullptr);
            if (!v || !v->is_bool() || !v->as_bool()) pruned = true;
        }
        if (!pruned) step();
        for (size_t i : checked) cond_done_[i] = false;
    }

    void step() {
        // Fewest unbound variables first; ties by clause order.
        size_t pick = rq_.rel_clauses.size();
        size_t best = SIZE_MAX;
        for (size_t i = 0; i < rq_.rel_clauses.size(); ++i) {
            if (clause_done_[i]) continue;
            size_t u = unbound_count(rq_.rel_clauses[i]);
            if (u < best) {
                best = u;
                pick = i;
            }
        }
        if (pick == rq_.rel_clauses.size()) {
            emit();
            return;
        }
        clause_done_[pick] = true;
        enumerate_clause(rq_.rel_clauses[pick]);
        clause_done_[pick] = false;
    }

    /// Binds the clause's unbound variables against every matching tuple.
    void try_tuple(const RelClause &cl, const ValueVec &tuple) {
        std::vector<std::string> newly;
        bool ok = true;
        for (size_t i = 0; i < cl.lhs.size() && ok; ++i) {
            auto it = env_.find(cl.lhs[i]);
            if (it != env_.end()) {
                ok = it->second == tuple[i];
            } else {
                env_[cl.lhs[i]] = tuple[i];
                newly.push_back(cl.lhs[i]);
            }
        }
        if (ok) recurse();
        for (const auto &v : newly) env_.erase(v);
    }

    void enumerate_clause(const RelClause &cl) {
        switch (cl.rel.kind) {
            case RelId::Kind::Field: {
                auto obj = env_.find(cl.lhs[0]);
                if (obj != env_.end()) {
                    if (counters_) ++counters_->heap_reads;
                    auto v = heap_.get_field(obj->second, cl.rel.name);
                    if (v) try_tuple(cl, {obj->second, *v});
                } else {
                    heap_.for_each_field_pair(cl.rel.name, [&](const Value &o, const Value &v) {
                        if (counters_) ++counters_->map_iterations;
                        try_tuple(cl, {o, v});
                    });
                }
                break;
            }
            case RelId::Kind::Member: {
                auto set = env_.find(cl.lhs[0]);
                if (set != env_.end()) {
                    if (!set->second.is_set()) break;
                    auto elem = env_.find(cl.lhs[1]);
                    if (elem != env_.end()) {
                        if (counters_) ++counters_->heap_reads;
                        if (heap_.set_contains(set->second, elem->second))
                            try_tuple(cl, {set->second, elem->second});
                    } else {
                        heap_.set_elems(set->second).for_each([&](const Value &e) {
                            if (counters_) ++counters_->map_iterations;
                            try_tuple(cl, {set->second, e});
                        });
                    }
                } else {
                    heap_.for_each_member_pair([&](const Value &s, const Value &e) {
                        if (counters_) ++counters_->map_iterations;
                        try_tuple(cl, {s, e});
                    });
                }
                break;
            }
            case RelId::Kind::Demand: {
                for (const auto &t : demand_) {
                    if (counters_) ++counters_->map_iterations;
                    try_tuple(cl, t);
                }
                break;
            }
            default: assert(false && "unexpected clause relation"); break;
        }
    }

    void emit() {
        if (on_binding_) on_binding_(env_);
    }

    const RelationalQuery &rq_;
    const Heap &heap_;
    const DemandTuples &demand_;
    OpCounters *counters_;
    std::vector<bool> clause_done_, cond_done_;
    std::unordered_map<std::string, Value> env_;
    std::function<void(const std::unordered_map<std::string, Value> &)> on_binding_;
};

} // namespace

ValueVec eval_naive(const QuerySpec &q, const ValueVec &args, const Heap &heap,
                    OpCounters *counters) {
    return NaiveObjectEval(q, heap, counters).run(args);
}

ValueVec eval_naive_relational(const RelationalQuery &rq, const std::optional<ValueVec> &args,
                               const Heap &heap, const DemandTuples &demand,
                               OpCounters *counters) {
    ValueVec out;
    NaiveRelationalEval eval(rq, heap, demand, counters);
    eval.run(args, [&](const std::unordered_map<std::string, Value> &env) {
        auto v = eval_expr(rq.result,
                           [&env](const std::string &n) -> const Value * {
                               auto it = env.find(n);
                               return it == env.end() ? nullptr : &it->second;
                           },
                           heap, nullptr);
        if (v) out.push_back(std::move(*v));
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::map<std::pair<Value, Value>, int64_t>
count_derivations(const RelationalQuery &rq, const Heap &heap, const DemandTuples &demand) {
    std::map<std::pair<Value, Value>, int64_t> counts;
    NaiveRelationalEval eval(rq, heap, demand, nullptr);
    eval.run(std::nullopt, [&](const std::unordered_map<std::string, Value> &env) {
        ValueVec key;
        for (const auto &p : rq.params) {
            auto it = env.find(p);
            if (it == env.end()) return; // parameter unconstrained: no demand row
            key.push_back(it->second);
        }
        auto v = eval_expr(rq.result,
                           [&env](const std::string &n) -> const Value * {
                               auto it = env.find(n);
                               return it == env.end() ? nullptr : &it->second;
                           },
                           heap, nullptr);
        if (!v) return;
        counts[{pack_key(key), *v}]++;
    });
    return counts;
}

std::vector<RelUpdate> lower_update(const TraceOp &op,
                                    const std::unordered_map<std::string, Value> &env,
                                    const Heap &heap, const DemandTuples &demand) {
    auto lookup = [&env](const std::string &n) -> const Value * {
        auto it = env.find(n);
        return it == env.end() ? nullptr : &it->second;
    };
    auto eval = [&](const ExprPtr &e) {
        auto v = eval_expr(e, lookup, heap, nullptr);
        if (!v) throw std::runtime_error("unbound value in update: " + expr_to_string(e));
        return *v;
    };
    std::vector<RelUpdate> out;
    switch (op.kind) {
        case TraceOp::Kind::FieldAssign: {
            const Value *obj = lookup(op.var);
            if (!obj || !obj->is_obj())
                throw std::runtime_error("field assignment needs a bound object");
            Value val = eval(op.value);
            auto old = heap.get_field(*obj, op.field);
            if (old) out.push_back({false, RelId::field(op.field), {*obj, *old}});
            out.push_back({true, RelId::field(op.field), {*obj, val}});
            break;
        }
        case TraceOp::Kind::SetAdd:
        case TraceOp::Kind::SetDel: {
            const Value *set = lookup(op.var);
            if (!set || !set->is_set()) throw std::runtime_error("element update needs a bound set");
            Value elem = eval(op.value);
            bool is_add = op.kind == TraceOp::Kind::SetAdd;
            if (heap.set_contains(*set, elem) != is_add)
                out.push_back({is_add, RelId::member(), {*set, elem}});
            break;
        }
        case TraceOp::Kind::DemandAdd:
        case TraceOp::Kind::DemandDel: {
            ValueVec tuple;
            for (const auto &a : op.args) tuple.push_back(eval(a));
            bool is_add = op.kind == TraceOp::Kind::DemandAdd;
            bool present = std::find(demand.begin(), demand.end(), tuple) != demand.end();
            if (present != is_add) out.push_back({is_add, RelId::demand(op.query), tuple});
            break;
        }
        default: break;
    }
    return out;
}

} // namespace incq
