#include "incq/plan.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace incq {

namespace {

std::string join(const std::vector<std::string> &xs, const char *sep = ",") {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) s += sep;
        s += xs[i];
    }
    return s;
}

} // namespace

std::string MaintInstr::head_string() const {
    switch (op) {
        case Op::ForImage: {
            // Component lists are in base-relation space; an inverted binary
            // relation keyed by component 2 reads as its natural prefix.
            bool prefix_key;
            if (rel.inverse && key_comps.size() == 1) {
                prefix_key = key_comps[0] == 2;
            } else {
                prefix_key = true;
                for (size_t i = 0; i < key_comps.size(); ++i)
                    if (key_comps[i] != static_cast<int>(i) + 1) prefix_key = false;
            }
            std::string s = "for (" + join(out_vars) + ") in img(" + rel.to_string();
            if (prefix_key) return s + "){" + join(key_vars) + "}";
            // Non-prefix access: img(R.j1,..){i1=x1,..}
            s += ".";
            for (size_t i = 0; i < out_comps.size(); ++i)
                s += (i ? "," : "") + std::to_string(out_comps[i]);
            s += "){";
            for (size_t i = 0; i < key_comps.size(); ++i)
                s += (i ? "," : "") + std::to_string(key_comps[i]) + "=" + key_vars[i];
            return s + "}";
        }
        case Op::IfMember: return "if (" + join(key_vars) + ") in " + rel.to_string();
        case Op::IfTest: return "if " + expr_to_string(test);
        case Op::IfNotEqual: return "if (" + join(tuple_a) + ") != (" + join(tuple_b) + ")";
        case Op::TagTest: return "if " + var + " in " + rel.to_string();
        case Op::ResultUpd:
            return rel.to_string() + (is_add ? " add " : " del ") + "(" + join(key_vars) + ", " +
                   expr_to_string(value) + ")";
        case Op::StoreUpd:
            return rel.to_string() + (is_add ? " += " : " -= ") + "{(" + join(key_vars) + "," +
                   join(out_vars) + ")}";
        case Op::TagUpd: return rel.to_string() + (is_add ? " add " : " del ") + var;
    }
    return "?";
}

std::string AuxDef::store_name() const {
    switch (kind) {
        case Kind::InverseMap:
        case Kind::FilteredInverse: return rel.to_string();
        case Kind::TagSet: return "T_" + var;
        case Kind::USet: return "U";
        case Kind::UMap: {
            std::string s = "U.";
            for (size_t i = 0; i < val_comps.size(); ++i)
                s += (i ? "," : "") + std::to_string(val_comps[i]);
            s += "/";
            for (size_t i = 0; i < key_comps.size(); ++i)
                s += (i ? "," : "") + std::to_string(key_comps[i]);
            return s;
        }
    }
    return "?";
}

std::vector<UpdateKind> update_kinds(const RelationalQuery &rq) {
    std::vector<RelId> bases;
    for (const auto &cl : rq.rel_clauses) {
        RelId base = cl.rel;
        base.occurrence = 0;
        base.inverse = false;
        base.filtered = false;
        if (std::find(bases.begin(), bases.end(), base) == bases.end()) bases.push_back(base);
    }
    std::vector<UpdateKind> kinds;
    for (const auto &b : bases) {
        kinds.push_back({b, true});
        kinds.push_back({b, false});
    }
    return kinds;
}

namespace {

/// Emits eligible pending conditions, cheapest (textually first) first.
void emit_ready_conditions(const RelationalQuery &rq, std::vector<bool> &cond_done,
                           const std::set<std::string> &bound, std::vector<MaintInstr> **cursor) {
    for (size_t i = 0; i < rq.conditions.size(); ++i) {
        if (cond_done[i]) continue;
        std::vector<std::string> vars;
        collect_vars(rq.conditions[i], vars);
        bool ready = true;
        for (const auto &v : vars)
            if (!bound.count(v)) {
                ready = false;
                break;
            }
        if (!ready) continue;
        cond_done[i] = true;
        MaintInstr instr;
        instr.op = MaintInstr::Op::IfTest;
        instr.test = rq.conditions[i];
        instr.cost = "1";
        (*cursor)->push_back(std::move(instr));
        *cursor = &(*cursor)->back().body;
    }
}

} // namespace

MaintBlock generate_maintenance(const AccessOrder &order, const QueryGraph &g,
                                const RelationalQuery &rq, bool is_add, int trigger_edge,
                                std::vector<MaintInstr> extra_guards, const std::string &block_id) {
    const Edge *trigger = g.find_edge(trigger_edge);
    assert(trigger);

    MaintBlock block;
    block.id = block_id;
    block.params = trigger->vars;
    block.trigger_edge = trigger_edge;

    std::set<std::string> bound(trigger->vars.begin(), trigger->vars.end());
    std::vector<bool> cond_done(rq.conditions.size(), false);
    std::vector<MaintInstr> *cursor = &block.instrs;

    emit_ready_conditions(rq, cond_done, bound, &cursor);

    for (const auto &step : order.steps) {
        const Edge *e = g.find_edge(step.edge_id);
        assert(e);
        std::vector<int> bound_comps, free_comps;
        std::vector<std::string> bound_vars, free_vars;
        for (size_t i = 0; i < e->vars.size(); ++i) {
            bool b = bound.count(e->vars[i]) != 0;
            (b ? bound_comps : free_comps).push_back(static_cast<int>(i) + 1);
            (b ? bound_vars : free_vars).push_back(e->vars[i]);
        }
        MaintInstr instr;
        if (free_comps.empty()) {
            instr.op = MaintInstr::Op::IfMember;
            instr.rel = e->label;
            instr.key_vars = e->vars;
            instr.cost = "1";
        } else {
            assert(!bound_comps.empty() && "full scans never appear in generated maintenance");
            instr.op = MaintInstr::Op::ForImage;
            instr.rel = e->label;
            if (!e->is_hyper() && bound_comps.size() == 1 && bound_comps[0] == 2)
                instr.rel = e->label.inverted();
            instr.out_vars = free_vars;
            instr.out_comps = free_comps;
            instr.key_vars = bound_vars;
            instr.key_comps = bound_comps;
            instr.cost = step.cost.symbol;
            for (const auto &v : free_vars) bound.insert(v);
        }
        cursor->push_back(std::move(instr));
        cursor = &cursor->back().body;
        emit_ready_conditions(rq, cond_done, bound, &cursor);
    }

    for (auto &gd : extra_guards) {
        cursor->push_back(std::move(gd));
        cursor = &cursor->back().body;
    }

    MaintInstr upd;
    upd.op = MaintInstr::Op::ResultUpd;
    upd.is_add = is_add;
    upd.rel = RelId::result(rq.name);
    upd.key_vars = rq.params;
    upd.value = rq.result;
    upd.cost = "1";
    cursor->push_back(std::move(upd));
    return block;
}

std::vector<MaintInstr> self_join_guards(const QueryGraph &g, int trigger_edge,
                                         const std::vector<int> &earlier_edges) {
    const Edge *trig = g.find_edge(trigger_edge);
    std::vector<MaintInstr> guards;
    for (int em : earlier_edges) {
        const Edge *e = g.find_edge(em);
        MaintInstr gd;
        gd.op = MaintInstr::Op::IfNotEqual;
        gd.tuple_a = e->vars;
        gd.tuple_b = trig->vars;
        gd.cost = "1";
        guards.push_back(std::move(gd));
    }
    return guards;
}

MaintenancePlan plan_incremental(const RelationalQuery &rq, const Hints &hints) {
    MaintenancePlan plan;
    plan.query = rq.name;
    plan.rq = rq;
    plan.graph = build_query_graph(rq);

    for (const UpdateKind &kind : update_kinds(rq)) {
        Handler handler;
        handler.kind = kind;
        // One result block per occurrence of the base relation, in clause
        // order; later blocks exclude the tuples handled by earlier ones.
        std::vector<int> occurrence_edges;
        for (const auto &e : plan.graph.edges)
            if (e.label.same_base(kind.rel)) occurrence_edges.push_back(e.id);

        std::vector<int> earlier;
        for (int eid : occurrence_edges) {
            if (std::none_of(plan.orders.begin(), plan.orders.end(),
                             [eid](const OrderDump &od) { return od.trigger_edge == eid; })) {
                OrderDump od;
                od.trigger_edge = eid;
                od.trigger_label = plan.graph.find_edge(eid)->label.to_string();
                od.considered = enumerate_orders(plan.graph, eid, hints);
                od.selected = 0;
                for (size_t i = 1; i < od.considered.size(); ++i)
                    if (compare_orders(od.considered[i], od.considered[od.selected]) < 0)
                        od.selected = static_cast<int>(i);
                for (size_t i = 0; i < od.considered.size(); ++i)
                    if (static_cast<int>(i) != od.selected &&
                        order_rank_key(od.considered[i]) ==
                            order_rank_key(od.considered[od.selected]))
                        od.rank_tie_broken = true;
                plan.orders.push_back(std::move(od));
            }
            const OrderDump *od = nullptr;
            for (const auto &o : plan.orders)
                if (o.trigger_edge == eid) od = &o;
            const AccessOrder &order = od->considered[od->selected];

            std::string bid = "result";
            if (occurrence_edges.size() > 1)
                bid += "[" + plan.graph.find_edge(eid)->label.to_string() + "]";
            handler.blocks.push_back(generate_maintenance(order, plan.graph, rq, kind.is_add, eid,
                                                          self_join_guards(plan.graph, eid, earlier),
                                                          bid));
            earlier.push_back(eid);
        }
        plan.handlers.emplace(kind.key(), std::move(handler));
    }

    derive_auxiliary_relations(plan);
    return plan;
}

namespace {

void scan_images(const std::vector<MaintInstr> &instrs,
                 const std::function<void(const MaintInstr &)> &f) {
    for (const auto &i : instrs) {
        f(i);
        scan_images(i.body, f);
    }
}

} // namespace

void derive_auxiliary_relations(MaintenancePlan &plan) {
    // Collect referenced inverse relations and demand projections.
    std::set<RelId> inverses;
    std::set<std::pair<std::vector<int>, std::vector<int>>> umaps;
    bool uses_u_set = plan.rq.has_demand_clause();
    for (const auto &[key, h] : plan.handlers)
        for (const auto &b : h.blocks)
            scan_images(b.instrs, [&](const MaintInstr &i) {
                if (i.op == MaintInstr::Op::ForImage) {
                    if (i.rel.inverse && !i.rel.filtered &&
                        (i.rel.kind == RelId::Kind::Field || i.rel.kind == RelId::Kind::Member)) {
                        RelId base = i.rel;
                        base.occurrence = 0; // one physical inverse per relation
                        inverses.insert(base);
                    } else if (i.rel.kind == RelId::Kind::Demand) {
                        umaps.insert({i.key_comps, i.out_comps});
                    }
                }
            });

    for (const auto &rel : inverses) {
        AuxDef def;
        def.kind = AuxDef::Kind::InverseMap;
        def.rel = rel;
        RelId fwd = rel;
        fwd.inverse = false;
        def.definition = rel.to_string() + " = {(y,x): (x,y) in " + fwd.to_string() + "}";
        plan.aux.push_back(def);

        // Maintain the inverse at updates to its base relation: before the
        // result blocks for additions, after them for deletions.
        RelId base = rel;
        base.inverse = false;
        for (bool is_add : {true, false}) {
            UpdateKind kind{base, is_add};
            auto it = plan.handlers.find(kind.key());
            if (it == plan.handlers.end()) continue;
            MaintBlock blk;
            blk.id = "aux[" + rel.to_string() + "]";
            blk.params = {"__src", "__dst"};
            MaintInstr upd;
            upd.op = MaintInstr::Op::StoreUpd;
            upd.is_add = is_add;
            upd.rel = rel;
            upd.key_vars = {"__dst"};
            upd.out_vars = {"__src"};
            upd.cost = "1";
            blk.instrs.push_back(std::move(upd));
            auto &blocks = it->second.blocks;
            if (is_add)
                blocks.insert(blocks.begin(), std::move(blk));
            else
                blocks.push_back(std::move(blk));
        }
    }

    if (uses_u_set) {
        AuxDef uset;
        uset.kind = AuxDef::Kind::USet;
        uset.definition = "U = demand set of " + plan.query;
        plan.aux.push_back(uset);
    }
    for (const auto &[key_comps, val_comps] : umaps) {
        AuxDef def;
        def.kind = AuxDef::Kind::UMap;
        def.key_comps = key_comps;
        def.val_comps = val_comps;
        def.definition = def.store_name() + " = keyed projection of U";
        plan.aux.push_back(def);
    }
}

namespace {

using nlohmann::json;

json instr_to_json(const MaintInstr &i) {
    json arr = json::array();
    arr.push_back(i.head_string());
    if (!i.cost.empty() && i.cost != "1") arr.push_back("cost " + i.cost);
    if (!i.body.empty()) {
        json body = json::array();
        for (const auto &c : i.body) body.push_back(instr_to_json(c));
        arr.push_back(body);
    }
    return arr;
}

} // namespace

std::string plan_to_json(const MaintenancePlan &plan) {
    json j;
    j["query"] = plan.query;
    j["mode"] = plan.filtered_mode ? (plan.osq ? "fil-osq" : "fil") : "inc";
    j["relational"] = plan.rq.to_string();
    j["result_counted"] = plan.result_counted;
    j["retrieval"] = "img(r){(" + join(plan.rq.params, ",") + ")}";

    json handlers = json::object();
    for (const auto &[key, h] : plan.handlers) {
        json blocks = json::array();
        for (const auto &b : h.blocks) {
            json blk;
            blk["id"] = b.id;
            blk["params"] = b.params;
            json instrs = json::array();
            for (const auto &i : b.instrs) instrs.push_back(instr_to_json(i));
            blk["instrs"] = instrs;
            blocks.push_back(blk);
        }
        handlers[key] = blocks;
    }
    j["handlers"] = handlers;

    json aux = json::array();
    for (const auto &a : plan.aux) aux.push_back(a.definition);
    j["aux_invariants"] = aux;

    json orders = json::array();
    for (const auto &od : plan.orders) {
        json o;
        o["trigger"] = od.trigger_label;
        o["selected"] = od.selected;
        if (od.rank_tie_broken) o["rank_tie_broken"] = true;
        json cands = json::array();
        for (const auto &cand : od.considered) {
            json steps = json::array();
            for (const auto &s : cand.steps) {
                json st;
                st["edge"] = s.edge_id;
                st["cost"] = s.cost.symbol;
                steps.push_back(st);
            }
            cands.push_back(steps);
        }
        o["considered"] = cands;
        orders.push_back(o);
    }
    j["orders"] = orders;
    return j.dump(2);
}

} // namespace incq
