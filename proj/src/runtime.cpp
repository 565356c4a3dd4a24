#include "incq/runtime.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include <nlohmann/json.hpp>

namespace incq {

std::string trace_op_kind_name(const TraceOp &op);

namespace {

const Value kUnitKey = Value::tuple({});

ValueVec sorted_unique(ValueVec v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::string set_to_string(const ValueVec &vs) {
    std::string s = "{";
    for (size_t i = 0; i < vs.size(); ++i) s += (i ? ", " : "") + vs[i].to_string();
    return s + "}";
}

} // namespace

Runtime::Runtime(const Script &script, std::vector<CompiledQuery> compiled, RuntimeOptions opts)
    : script_(script), opts_(opts) {
    for (auto &cq : compiled) {
        QueryState qs;
        qs.cq = std::move(cq);
        for (const auto &sd : qs.cq.oplan.stores)
            qs.stores.emplace_back(sd.counted);
        for (const auto &dp : qs.cq.spec.demand_params) {
            auto it = std::find(qs.cq.spec.params.begin(), qs.cq.spec.params.end(), dp);
            qs.demand_positions.push_back(
                static_cast<int>(it - qs.cq.spec.params.begin()));
        }
        states_.push_back(std::move(qs));
    }
}

Runtime::QueryState *Runtime::state_for(const std::string &query) {
    for (auto &qs : states_)
        if (qs.cq.spec.name == query) return &qs;
    return nullptr;
}

const QuerySpec *Runtime::spec_for(const std::string &query) const {
    return script_.find_query(query);
}

Value Runtime::trace_var(const std::string &name, size_t op_index) {
    auto it = env_.find(name);
    if (it == env_.end()) throw TraceError(op_index, "unbound variable '" + name + "'");
    return it->second;
}

Value Runtime::trace_value(const ExprPtr &e, size_t op_index) {
    auto v = eval_expr(e,
                       [this](const std::string &n) -> const Value * {
                           auto it = env_.find(n);
                           return it == env_.end() ? nullptr : &it->second;
                       },
                       heap_, counting_ ? &counters_ : nullptr);
    if (!v) throw TraceError(op_index, "trace expression failed: " + expr_to_string(e));
    return *v;
}

void Runtime::run_all() { run_range(0, script_.trace.size()); }

void Runtime::run_range(size_t begin, size_t end) {
    for (size_t i = begin; i < end && i < script_.trace.size(); ++i) run_op(i);
}

void Runtime::run_op(size_t i) {
    const TraceOp &op = script_.trace[i];
    OpCounters before = counters_;
    switch (op.kind) {
        case TraceOp::Kind::NewObject: env_[op.var] = heap_.new_object(); break;
        case TraceOp::Kind::NewSet: env_[op.var] = heap_.new_set(); break;
        case TraceOp::Kind::FieldAssign: {
            Value obj = trace_var(op.var, i);
            if (!obj.is_obj()) throw TraceError(i, "field assignment to a non-object");
            Value val = trace_value(op.value, i);
            tick_heap();
            auto old = heap_.get_field(obj, op.field);
            if (opts_.mode == Mode::Orig) {
                heap_.set_field(obj, op.field, val);
                break;
            }
            // An overwrite decomposes into a deletion of the old pair before
            // the heap change and an addition of the new pair after it.
            if (old) apply_update({false, RelId::field(op.field), {obj, *old}}, i);
            heap_.set_field(obj, op.field, val);
            apply_update({true, RelId::field(op.field), {obj, val}}, i);
            break;
        }
        case TraceOp::Kind::SetAdd:
        case TraceOp::Kind::SetDel: {
            Value set = trace_var(op.var, i);
            if (!set.is_set()) throw TraceError(i, "element update on a non-set");
            Value elem = trace_value(op.value, i);
            bool is_add = op.kind == TraceOp::Kind::SetAdd;
            tick_heap();
            bool present = heap_.set_contains(set, elem);
            if (is_add == present) break; // guarded update: nothing to do
            if (opts_.mode == Mode::Orig) {
                if (is_add)
                    heap_.set_add(set, elem);
                else
                    heap_.set_del(set, elem);
                break;
            }
            if (is_add) {
                heap_.set_add(set, elem);
                apply_update({true, RelId::member(), {set, elem}}, i);
            } else {
                apply_update({false, RelId::member(), {set, elem}}, i);
                heap_.set_del(set, elem);
            }
            break;
        }
        case TraceOp::Kind::DemandAdd:
        case TraceOp::Kind::DemandDel: {
            ValueVec tuple;
            for (const auto &a : op.args) tuple.push_back(trace_value(a, i));
            if (opts_.mode == Mode::Orig) break; // demand only matters to maintained modes
            QueryState *qs = state_for(op.query);
            if (!qs) throw TraceError(i, "unknown query " + op.query);
            if (op.kind == TraceOp::Kind::DemandAdd)
                demand_add(*qs, tuple, i);
            else
                demand_del(*qs, tuple, i);
            break;
        }
        case TraceOp::Kind::Ask: {
            ValueVec args;
            for (const auto &a : op.args) args.push_back(trace_value(a, i));
            try {
                ValueVec result = ask(op.query, args);
                if (opts_.ask_output)
                    (*opts_.ask_output) << op.query << to_string(args) << " = "
                                        << set_to_string(result) << "\n";
            } catch (const std::runtime_error &e) {
                throw TraceError(i, e.what());
            }
            break;
        }
        case TraceOp::Kind::AssertResult: {
            ValueVec args;
            for (const auto &a : op.args) args.push_back(trace_value(a, i));
            bool saved = counting_;
            counting_ = false;
            ValueVec got;
            try {
                got = ask(op.query, args);
            } catch (const std::runtime_error &e) {
                counting_ = saved;
                throw TraceError(i, e.what());
            }
            counting_ = saved;
            ValueVec want = sorted_unique(op.expected);
            if (got != want)
                throw TraceError(i, "assertion failed for " + op.query + to_string(args) +
                                        ": got " + set_to_string(got) + ", want " +
                                        set_to_string(want));
            break;
        }
    }
    if (counting_) {
        per_op_[trace_op_kind_name(op)] += counters_ - before;
    }
    if (opts_.check_invariants) check_all_invariants();
}

std::string trace_op_kind_name(const TraceOp &op) {
    switch (op.kind) {
        case TraceOp::Kind::NewObject: return "new";
        case TraceOp::Kind::NewSet: return "newset";
        case TraceOp::Kind::FieldAssign: return "assign." + op.field;
        case TraceOp::Kind::SetAdd: return "setadd";
        case TraceOp::Kind::SetDel: return "setdel";
        case TraceOp::Kind::DemandAdd: return "demand";
        case TraceOp::Kind::DemandDel: return "undemand";
        case TraceOp::Kind::Ask: return "ask";
        case TraceOp::Kind::AssertResult: return "assert";
    }
    return "?";
}

void Runtime::demand_add(QueryState &qs, const ValueVec &tuple, size_t op_index) {
    if (tuple.size() != qs.cq.spec.demand_params.size())
        throw TraceError(op_index, "demand arity mismatch for " + qs.cq.spec.name);
    if (qs.cq.oplan.uset_store < 0) return; // query without a demand clause
    CountedMap &uset = qs.stores[qs.cq.oplan.uset_store];
    Value packed = pack_key(tuple);
    tick_lookup();
    if (uset.contains(kUnitKey, packed)) return; // guarded
    uset.add(kUnitKey, packed);
    for (int mi : qs.cq.oplan.umap_stores) {
        const StoreDesc &sd = qs.cq.oplan.stores[mi];
        ValueVec key, val;
        for (int c : sd.key_comps) key.push_back(tuple[c - 1]);
        for (int c : sd.val_comps) val.push_back(tuple[c - 1]);
        tick_lookup();
        qs.stores[mi].add(pack_key(key), pack_key(val));
    }
    dispatch(qs, RelId::demand(qs.cq.spec.name).base_name() + ":+", tuple);
}

void Runtime::demand_del(QueryState &qs, const ValueVec &tuple, size_t op_index) {
    if (tuple.size() != qs.cq.spec.demand_params.size())
        throw TraceError(op_index, "demand arity mismatch for " + qs.cq.spec.name);
    if (qs.cq.oplan.uset_store < 0) return;
    CountedMap &uset = qs.stores[qs.cq.oplan.uset_store];
    Value packed = pack_key(tuple);
    tick_lookup();
    if (!uset.contains(kUnitKey, packed)) return; // guarded
    dispatch(qs, RelId::demand(qs.cq.spec.name).base_name() + ":-", tuple);
    uset.del(kUnitKey, packed);
    for (int mi : qs.cq.oplan.umap_stores) {
        const StoreDesc &sd = qs.cq.oplan.stores[mi];
        ValueVec key, val;
        for (int c : sd.key_comps) key.push_back(tuple[c - 1]);
        for (int c : sd.val_comps) val.push_back(tuple[c - 1]);
        tick_lookup();
        qs.stores[mi].del(pack_key(key), pack_key(val));
    }
}

void Runtime::apply_update(const RelUpdate &upd, size_t) {
    std::string key = upd.rel.base_name() + (upd.is_add ? ":+" : ":-");
    for (auto &qs : states_) dispatch(qs, key, upd.tuple);
}

void Runtime::dispatch(QueryState &qs, const std::string &handler_key, const ValueVec &tuple) {
    const auto &handlers = qs.cq.oplan.handlers;
    auto it = handlers.find(handler_key);
    if (it == handlers.end()) return;
    if (opts_.use_relational_plans) {
        const auto &mh = qs.cq.mplan.handlers.at(handler_key);
        for (const auto &b : mh.blocks) {
            OpCounters before = counters_;
            if (opts_.trace_log)
                (*opts_.trace_log) << qs.cq.spec.name << " " << handler_key << " " << b.id << "\n";
            exec_maint_block(qs, b, tuple);
            per_handler_[qs.cq.spec.name + "/" + handler_key + "/" + b.id] += counters_ - before;
        }
        return;
    }
    for (const auto &b : it->second.blocks) {
        OpCounters before = counters_;
        if (opts_.trace_log)
            (*opts_.trace_log) << qs.cq.spec.name << " " << handler_key << " " << b.id << "\n";
        exec_obj_block(qs, b, tuple);
        per_handler_[qs.cq.spec.name + "/" + handler_key + "/" + b.id] += counters_ - before;
    }
}

void Runtime::exec_obj_block(QueryState &qs, const ObjBlock &b, const ValueVec &tuple) {
    assert(tuple.size() == b.n_params);
    ValueVec frame(b.slot_names.size());
    for (size_t i = 0; i < tuple.size(); ++i) frame[i] = tuple[i];
    exec_obj_list(qs, b, b.instrs, frame);
}

void Runtime::exec_obj_list(QueryState &qs, const ObjBlock &b, const std::vector<ObjInstr> &instrs,
                            ValueVec &frame) {
    for (const auto &i : instrs) {
        switch (i.op) {
            case ObjInstr::Op::HasFieldBind: {
                tick_guard();
                auto v = heap_.get_field(frame[i.a], i.field);
                if (!v) break;
                tick_heap();
                frame[i.out_slots[0]] = *v;
                exec_obj_list(qs, b, i.body, frame);
                break;
            }
            case ObjInstr::Op::FieldEqTest: {
                tick_guard();
                auto v = heap_.get_field(frame[i.a], i.field);
                if (!v) break;
                tick_heap();
                if (*v == frame[i.b]) exec_obj_list(qs, b, i.body, frame);
                break;
            }
            case ObjInstr::Op::IsSetForElem: {
                tick_guard();
                if (!frame[i.a].is_set()) break;
                heap_.set_elems(frame[i.a]).for_each([&](const Value &e) {
                    tick_iter();
                    frame[i.out_slots[0]] = e;
                    exec_obj_list(qs, b, i.body, frame);
                });
                break;
            }
            case ObjInstr::Op::IsSetElemTest: {
                tick_guard();
                if (!frame[i.a].is_set()) break;
                tick_heap();
                if (heap_.set_contains(frame[i.a], frame[i.b]))
                    exec_obj_list(qs, b, i.body, frame);
                break;
            }
            case ObjInstr::Op::MapForImage: {
                tick_lookup();
                ValueVec key;
                for (int s : i.key_slots) key.push_back(frame[s]);
                const CountedSet *img = qs.stores[i.store].image(pack_key(key));
                if (!img) break;
                img->for_each([&](const Value &v) {
                    tick_iter();
                    if (i.out_slots.size() == 1) {
                        frame[i.out_slots[0]] = v;
                    } else {
                        assert(v.is_tuple() && v.elems().size() == i.out_slots.size());
                        for (size_t k = 0; k < i.out_slots.size(); ++k)
                            frame[i.out_slots[k]] = v.elems()[k];
                    }
                    exec_obj_list(qs, b, i.body, frame);
                });
                break;
            }
            case ObjInstr::Op::MapMemberTest: {
                tick_lookup();
                ValueVec key;
                for (int s : i.key_slots) key.push_back(frame[s]);
                ValueVec val;
                for (int s : i.out_slots) val.push_back(frame[s]);
                if (qs.stores[i.store].contains(i.key_slots.empty() ? kUnitKey : pack_key(key),
                                                pack_key(val)))
                    exec_obj_list(qs, b, i.body, frame);
                break;
            }
            case ObjInstr::Op::TagTest: {
                tick_lookup();
                if (qs.stores[i.store].contains(kUnitKey, frame[i.a]))
                    exec_obj_list(qs, b, i.body, frame);
                break;
            }
            case ObjInstr::Op::CondTest: {
                tick_guard();
                auto v = eval_expr(i.expr,
                                   [&](const std::string &n) -> const Value * {
                                       auto it = b.slot_of.find(n);
                                       return it == b.slot_of.end() ? nullptr : &frame[it->second];
                                   },
                                   heap_, nullptr);
                if (v && v->is_bool() && v->as_bool()) exec_obj_list(qs, b, i.body, frame);
                break;
            }
            case ObjInstr::Op::NotEqualTest: {
                tick_guard();
                bool equal = true;
                for (size_t k = 0; k < i.slots_a.size(); ++k)
                    if (!(frame[i.slots_a[k]] == frame[i.slots_b[k]])) equal = false;
                if (!equal) exec_obj_list(qs, b, i.body, frame);
                break;
            }
            case ObjInstr::Op::TagCAdd: {
                tick_counted();
                if (qs.stores[i.store].cadd(kUnitKey, frame[i.a]))
                    exec_obj_list(qs, b, i.body, frame);
                break;
            }
            case ObjInstr::Op::TagCDel: {
                tick_counted();
                if (qs.stores[i.store].cdel(kUnitKey, frame[i.a]))
                    exec_obj_list(qs, b, i.body, frame);
                break;
            }
            case ObjInstr::Op::StoreAdd: {
                tick_lookup();
                ValueVec key;
                for (int s : i.key_slots) key.push_back(frame[s]);
                ValueVec val;
                for (int s : i.out_slots) val.push_back(frame[s]);
                qs.stores[i.store].add(pack_key(key), pack_key(val));
                break;
            }
            case ObjInstr::Op::StoreDel: {
                tick_lookup();
                ValueVec key;
                for (int s : i.key_slots) key.push_back(frame[s]);
                ValueVec val;
                for (int s : i.out_slots) val.push_back(frame[s]);
                qs.stores[i.store].del(pack_key(key), pack_key(val));
                break;
            }
            case ObjInstr::Op::ResultUpd: {
                auto v = eval_expr(i.expr,
                                   [&](const std::string &n) -> const Value * {
                                       auto it = b.slot_of.find(n);
                                       return it == b.slot_of.end() ? nullptr : &frame[it->second];
                                   },
                                   heap_, nullptr);
                if (!v) break; // evaluation error skips this binding
                ValueVec key;
                for (int s : i.key_slots) key.push_back(frame[s]);
                CountedMap &r = qs.stores[i.store];
                if (r.counted()) {
                    tick_counted();
                    if (i.is_add)
                        r.cadd(pack_key(key), *v);
                    else
                        r.cdel(pack_key(key), *v);
                } else {
                    tick_lookup();
                    if (i.is_add)
                        r.add_if_absent(pack_key(key), *v);
                    else
                        r.del(pack_key(key), *v);
                }
                break;
            }
        }
    }
}

void Runtime::exec_maint_block(QueryState &qs, const MaintBlock &b, const ValueVec &tuple) {
    assert(tuple.size() == b.params.size());
    std::unordered_map<std::string, Value> env;
    for (size_t i = 0; i < b.params.size(); ++i) env[b.params[i]] = tuple[i];
    exec_maint_list(qs, b.instrs, env);
}

/// Interpreter over the relational plan; observationally equivalent to the
/// lowered object plan (differential-tested), with guards implicit in the
/// virtual-relation reads.
void Runtime::exec_maint_list(QueryState &qs, const std::vector<MaintInstr> &instrs,
                              std::unordered_map<std::string, Value> &env) {
    auto store_of = [&qs](const RelId &rel) -> CountedMap & {
        std::string name;
        if (rel.filtered) {
            name = rel.inverse ? rel.to_string() : rel.inverted().to_string();
        } else {
            RelId base = rel;
            base.occurrence = 0;
            name = base.to_string();
        }
        int idx = qs.cq.oplan.store_index(name);
        if (idx < 0) throw std::logic_error("relational plan references unknown store " + name);
        return qs.stores[idx];
    };
    auto lookup = [&env](const std::string &n) -> const Value * {
        auto it = env.find(n);
        return it == env.end() ? nullptr : &it->second;
    };

    for (const auto &i : instrs) {
        switch (i.op) {
            case MaintInstr::Op::ForImage: {
                auto iterate = [&](const CountedSet *img) {
                    if (!img) return;
                    img->for_each([&](const Value &v) {
                        tick_iter();
                        if (i.out_vars.size() == 1) {
                            env[i.out_vars[0]] = v;
                        } else {
                            for (size_t k = 0; k < i.out_vars.size(); ++k)
                                env[i.out_vars[k]] = v.elems()[k];
                        }
                        exec_maint_list(qs, i.body, env);
                    });
                    for (const auto &v : i.out_vars) env.erase(v);
                };
                if (i.rel.kind == RelId::Kind::Demand) {
                    std::string name = "U.";
                    for (size_t k = 0; k < i.out_comps.size(); ++k)
                        name += (k ? "," : "") + std::to_string(i.out_comps[k]);
                    name += "/";
                    for (size_t k = 0; k < i.key_comps.size(); ++k)
                        name += (k ? "," : "") + std::to_string(i.key_comps[k]);
                    int idx = qs.cq.oplan.store_index(name);
                    ValueVec key;
                    for (const auto &v : i.key_vars) key.push_back(env.at(v));
                    tick_lookup();
                    iterate(qs.stores[idx].image(pack_key(key)));
                } else if (i.rel.filtered || i.rel.inverse) {
                    tick_lookup();
                    iterate(store_of(i.rel).image(env.at(i.key_vars[0])));
                } else if (i.rel.kind == RelId::Kind::Field) {
                    tick_heap();
                    auto v = heap_.get_field(env.at(i.key_vars[0]), i.rel.name);
                    if (v) {
                        env[i.out_vars[0]] = *v;
                        exec_maint_list(qs, i.body, env);
                        env.erase(i.out_vars[0]);
                    }
                } else {
                    const Value &set = env.at(i.key_vars[0]);
                    if (!set.is_set()) break;
                    heap_.set_elems(set).for_each([&](const Value &e) {
                        tick_iter();
                        env[i.out_vars[0]] = e;
                        exec_maint_list(qs, i.body, env);
                    });
                    env.erase(i.out_vars[0]);
                }
                break;
            }
            case MaintInstr::Op::IfMember: {
                bool ok = false;
                if (i.rel.kind == RelId::Kind::Demand) {
                    ValueVec t;
                    for (const auto &v : i.key_vars) t.push_back(env.at(v));
                    tick_lookup();
                    ok = qs.stores[qs.cq.oplan.uset_store].contains(kUnitKey, pack_key(t));
                } else if (i.rel.filtered) {
                    tick_lookup();
                    ok = store_of(i.rel).contains(env.at(i.key_vars[1]), env.at(i.key_vars[0]));
                } else if (i.rel.kind == RelId::Kind::Field) {
                    tick_heap();
                    auto v = heap_.get_field(env.at(i.key_vars[0]), i.rel.name);
                    ok = v && *v == env.at(i.key_vars[1]);
                } else {
                    tick_heap();
                    const Value &set = env.at(i.key_vars[0]);
                    ok = set.is_set() && heap_.set_contains(set, env.at(i.key_vars[1]));
                }
                if (ok) exec_maint_list(qs, i.body, env);
                break;
            }
            case MaintInstr::Op::IfTest: {
                tick_guard();
                auto v = eval_expr(i.test, lookup, heap_, nullptr);
                if (v && v->is_bool() && v->as_bool()) exec_maint_list(qs, i.body, env);
                break;
            }
            case MaintInstr::Op::IfNotEqual: {
                tick_guard();
                bool equal = true;
                for (size_t k = 0; k < i.tuple_a.size(); ++k)
                    if (!(env.at(i.tuple_a[k]) == env.at(i.tuple_b[k]))) equal = false;
                if (!equal) exec_maint_list(qs, i.body, env);
                break;
            }
            case MaintInstr::Op::TagTest: {
                tick_lookup();
                if (store_of(i.rel).contains(kUnitKey, env.at(i.var)))
                    exec_maint_list(qs, i.body, env);
                break;
            }
            case MaintInstr::Op::TagUpd: {
                tick_counted();
                CountedMap &tag = store_of(i.rel);
                bool transition = i.is_add ? tag.cadd(kUnitKey, env.at(i.var))
                                           : tag.cdel(kUnitKey, env.at(i.var));
                if (transition) exec_maint_list(qs, i.body, env);
                break;
            }
            case MaintInstr::Op::StoreUpd: {
                tick_lookup();
                CountedMap &st = store_of(i.rel);
                if (i.is_add)
                    st.add(env.at(i.key_vars[0]), env.at(i.out_vars[0]));
                else
                    st.del(env.at(i.key_vars[0]), env.at(i.out_vars[0]));
                break;
            }
            case MaintInstr::Op::ResultUpd: {
                auto v = eval_expr(i.value, lookup, heap_, nullptr);
                if (!v) break;
                ValueVec key;
                for (const auto &p : i.key_vars) key.push_back(env.at(p));
                CountedMap &r = qs.stores[qs.cq.oplan.result_store];
                if (r.counted()) {
                    tick_counted();
                    if (i.is_add)
                        r.cadd(pack_key(key), *v);
                    else
                        r.cdel(pack_key(key), *v);
                } else {
                    tick_lookup();
                    if (i.is_add)
                        r.add_if_absent(pack_key(key), *v);
                    else
                        r.del(pack_key(key), *v);
                }
                break;
            }
        }
    }
}

ValueVec Runtime::ask(const std::string &query, const ValueVec &args) {
    const QuerySpec *spec = spec_for(query);
    if (!spec) throw std::runtime_error("unknown query " + query);
    if (args.size() != spec->params.size())
        throw std::runtime_error("ask arity mismatch for " + query);

    if (opts_.mode == Mode::Orig)
        return eval_naive(*spec, args, heap_, counting_ ? &counters_ : nullptr);

    QueryState *qs = state_for(query);
    if (!qs) throw std::runtime_error("query not compiled: " + query);

    ValueVec result;
    if (qs->cq.oplan.uset_store < 0) {
        // Degenerate query without a demand clause: nothing is maintained.
        result = eval_naive(*spec, args, heap_, counting_ ? &counters_ : nullptr);
    } else {
        ValueVec dtuple;
        for (int pos : qs->demand_positions) dtuple.push_back(args[pos]);
        CountedMap &uset = qs->stores[qs->cq.oplan.uset_store];
        tick_lookup();
        if (!uset.contains(kUnitKey, pack_key(dtuple))) {
            if (!opts_.auto_demand)
                throw std::runtime_error("not demanded: " + query + to_string(dtuple));
            demand_add(*qs, dtuple, 0);
        }
        tick_lookup();
        const CountedSet *img = qs->stores[qs->cq.oplan.result_store].image(pack_key(args));
        if (img) {
            if (opts_.copy_results)
                img->for_each([&](const Value &v) {
                    tick_iter();
                    result.push_back(v);
                });
            else
                result = img->to_vector();
        }
        std::sort(result.begin(), result.end());
    }

    if (opts_.check_against_orig) {
        bool saved = counting_;
        counting_ = false;
        ValueVec naive = eval_naive(*spec, args, heap_, nullptr);
        counting_ = saved;
        if (naive != result)
            throw std::runtime_error("divergence on " + query + to_string(args) + ": " +
                                     to_string(opts_.mode) + " " + set_to_string(result) +
                                     " vs orig " + set_to_string(naive));
    }
    return result;
}

size_t Runtime::aux_space() const {
    size_t n = 0;
    for (const auto &qs : states_)
        for (const auto &s : qs.stores) n += s.live_size();
    return n;
}

size_t Runtime::demand_dependent_space() const {
    size_t n = 0;
    for (const auto &qs : states_)
        for (size_t i = 0; i < qs.stores.size(); ++i)
            if (qs.cq.oplan.stores[i].kind != StoreDesc::Kind::InverseMap)
                n += qs.stores[i].live_size();
    return n;
}

size_t Runtime::store_live_size(const std::string &query, const std::string &store) const {
    for (const auto &qs : states_) {
        if (qs.cq.spec.name != query) continue;
        int idx = qs.cq.oplan.store_index(store);
        if (idx < 0) return 0;
        const CountedMap &m = qs.stores[idx];
        const StoreDesc &sd = qs.cq.oplan.stores[idx];
        if (sd.kind == StoreDesc::Kind::TagSet || sd.kind == StoreDesc::Kind::USet) {
            const CountedSet *img = m.image(kUnitKey);
            return img ? img->size() : 0;
        }
        return m.live_size();
    }
    return 0;
}

std::string Runtime::store_digest() const {
    std::ostringstream os;
    for (const auto &qs : states_) {
        os << qs.cq.spec.name << "\n";
        for (size_t i = 0; i < qs.stores.size(); ++i) {
            os << "  " << qs.cq.oplan.stores[i].name << ":";
            std::vector<std::string> rows;
            qs.stores[i].for_each_key([&](const Value &k) {
                qs.stores[i].image(k)->for_each_counted([&](const Value &v, int32_t c) {
                    rows.push_back(k.to_string() + "->" + v.to_string() +
                                   (qs.stores[i].counted() ? "x" + std::to_string(c) : ""));
                });
            });
            std::sort(rows.begin(), rows.end());
            for (const auto &r : rows) os << " " << r;
            os << "\n";
        }
    }
    return os.str();
}

std::string Runtime::stats_json() const {
    nlohmann::json j;
    auto cj = [](const OpCounters &c) {
        nlohmann::json o;
        o["heap_reads"] = c.heap_reads;
        o["map_lookups"] = c.map_lookups;
        o["map_iterations"] = c.map_iterations;
        o["counted_ops"] = c.counted_ops;
        o["guard_tests"] = c.guard_tests;
        o["total"] = c.total();
        return o;
    };
    j["mode"] = to_string(opts_.mode);
    j["counters"] = cj(counters_);
    nlohmann::json per_op = nlohmann::json::object();
    for (const auto &[k, c] : per_op_) per_op[k] = cj(c);
    j["per_op"] = per_op;
    nlohmann::json per_handler = nlohmann::json::object();
    for (const auto &[k, c] : per_handler_) per_handler[k] = cj(c);
    j["per_handler"] = per_handler;
    nlohmann::json stores = nlohmann::json::object();
    for (const auto &qs : states_) {
        nlohmann::json qstores = nlohmann::json::object();
        for (size_t i = 0; i < qs.stores.size(); ++i)
            qstores[qs.cq.oplan.stores[i].name] = qs.stores[i].live_size();
        stores[qs.cq.spec.name] = qstores;
    }
    j["live_store_sizes"] = stores;
    j["aux_space"] = aux_space();
    return j.dump(2);
}

} // namespace incq
