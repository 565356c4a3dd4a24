#include "incq/demand.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace incq {

namespace {

/// Forward reachability over the binary edges only (the hyperedge seeds).
std::set<std::string> reach_from(const QueryGraph &g, const std::vector<std::string> &seeds) {
    std::set<std::string> r(seeds.begin(), seeds.end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto &e : g.edges) {
            if (e.is_hyper()) continue;
            if (r.count(e.src()) && !r.count(e.dst())) {
                r.insert(e.dst());
                changed = true;
            }
        }
    }
    return r;
}

/// Vertices that reach `target` following edge direction.
std::set<std::string> reaching(const QueryGraph &g, const std::string &target) {
    std::set<std::string> r{target};
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto &e : g.edges) {
            if (e.is_hyper()) continue;
            if (r.count(e.dst()) && !r.count(e.src())) {
                r.insert(e.src());
                changed = true;
            }
        }
    }
    return r;
}

bool path_exists(const std::vector<std::pair<std::string, std::string>> &edges,
                 const std::string &from, const std::string &to) {
    if (from == to) return true;
    std::set<std::string> seen{from};
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto &[s, d] : edges)
            if (seen.count(s) && !seen.count(d)) {
                if (d == to) return true;
                seen.insert(d);
                changed = true;
            }
    }
    return false;
}

} // namespace

DemandSubgraph find_demand_subgraph(const QueryGraph &g, const RelationalQuery &rq,
                                    const std::string &var) {
    DemandSubgraph sub;
    sub.target = var;
    std::set<std::string> from_u = reach_from(g, rq.demand_params);
    std::set<std::string> to_var = reaching(g, var);

    // Candidate edges lie on a directed path from a demand parameter to var;
    // accept in ascending id order, skipping any edge that would close a cycle.
    std::vector<std::pair<std::string, std::string>> accepted;
    for (const auto &e : g.edges) {
        if (e.is_hyper()) continue;
        if (!from_u.count(e.src()) || !to_var.count(e.dst())) continue;
        if (e.src() != e.dst() && !path_exists(accepted, e.dst(), e.src())) {
            accepted.emplace_back(e.src(), e.dst());
            sub.edges.push_back(e.id);
        }
    }
    return sub;
}

FilterDefs define_filter_invariants(const QueryGraph &g, const RelationalQuery &rq, bool osq) {
    FilterDefs defs;
    defs.osq = osq;

    std::set<int> d_edges;
    for (const auto &v : g.vertices) {
        DemandSubgraph sub = find_demand_subgraph(g, rq, v);
        d_edges.insert(sub.edges.begin(), sub.edges.end());
    }
    defs.d_edges.assign(d_edges.begin(), d_edges.end());

    for (int eid : defs.d_edges) {
        const Edge *e = g.find_edge(eid);
        FilteredRelDef f;
        f.edge_id = eid;
        f.base = e->label;
        f.src_var = e->src();
        f.dst_var = e->dst();
        defs.fil.emplace(eid, std::move(f));
    }

    auto tag_for = [&defs](const std::string &v) -> TagSetDef & {
        auto it = defs.tags.find(v);
        if (it == defs.tags.end()) {
            TagSetDef t;
            t.var = v;
            it = defs.tags.emplace(v, std::move(t)).first;
        }
        return it->second;
    };
    for (size_t i = 0; i < rq.demand_params.size(); ++i) {
        TagSetDef &t = tag_for(rq.demand_params[i]);
        t.is_demand_param = true;
        t.dp_comp = static_cast<int>(i) + 1;
    }
    for (int eid : defs.d_edges) {
        const Edge *e = g.find_edge(eid);
        tag_for(e->src());
        tag_for(e->dst()).incoming.push_back(eid);
    }
    for (auto &[v, t] : defs.tags) std::sort(t.incoming.begin(), t.incoming.end());
    return defs;
}

namespace {

/// Emits demand-propagation code: filtered-edge events cascade into tag-set
/// deltas, and tag membership transitions cascade into downstream edges.
class PropagationEmitter {
public:
    PropagationEmitter(const QueryGraph &g, FilterDefs &defs) : g_(g), defs_(defs) {}

    /// Closes liveness: tags need their defining edges tracked, active edges
    /// need their source tags, and multi-edge tags read their sibling inverse
    /// stores.
    void close_liveness() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto &[v, t] : defs_.tags) {
                if (!t.live) continue;
                auto defining = defs_.defining_incoming(t);
                for (int eid : defining) {
                    auto &f = defs_.fil.at(eid);
                    if (!f.active) {
                        f.active = true;
                        changed = true;
                    }
                    if (defining.size() >= 2 && !f.store_live) {
                        f.store_live = true;
                        changed = true;
                    }
                }
            }
            for (auto &[eid, f] : defs_.fil) {
                if (f.store_live && !f.active) {
                    f.active = true;
                    changed = true;
                }
                if (f.active) {
                    auto it = defs_.tags.find(f.src_var);
                    if (it != defs_.tags.end() && !it->second.live) {
                        it->second.live = true;
                        changed = true;
                    }
                }
            }
        }
    }

    /// Handles the event "filtered edge eid gains/loses the pair named
    /// (src_name, dst_name)"; both names are bound in the emitted context.
    /// `scope` holds every name in use, for renaming of invariant-local
    /// variables.
    std::vector<MaintInstr> fil_event(int eid, bool is_add, const std::string &src_name,
                                      const std::string &dst_name, std::set<std::string> scope) {
        const FilteredRelDef &f = defs_.fil.at(eid);
        std::vector<MaintInstr> out;

        MaintInstr store;
        bool have_store = f.store_live;
        if (have_store) {
            store.op = MaintInstr::Op::StoreUpd;
            store.is_add = is_add;
            store.rel = f.base.inverted().with_filter();
            store.key_vars = {dst_name};
            store.out_vars = {src_name};
            store.cost = "1";
        }

        std::vector<MaintInstr> deltas;
        auto t_it = defs_.tags.find(f.dst_var);
        if (t_it != defs_.tags.end() && t_it->second.live) {
            auto defining = defs_.defining_incoming(t_it->second);
            if (std::find(defining.begin(), defining.end(), eid) != defining.end())
                deltas = tag_delta(t_it->second, eid, src_name, dst_name, is_add, scope);
        }

        // Store updates precede dependent maintenance on addition and follow
        // it on deletion, so sibling blocks of one update see exact deltas.
        if (is_add) {
            if (have_store) out.push_back(std::move(store));
            for (auto &d : deltas) out.push_back(std::move(d));
        } else {
            for (auto &d : deltas) out.push_back(std::move(d));
            if (have_store) out.push_back(std::move(store));
        }
        return out;
    }

    /// Tag-count delta for one defining-edge event: one counted update per
    /// combination of witnesses on the sibling defining edges. A sibling
    /// sharing the trigger's source vertex is constrained to the same value
    /// (one membership test); any other sibling source is an independent
    /// existential and is iterated afresh.
    std::vector<MaintInstr> tag_delta(const TagSetDef &t, int trigger_eid,
                                      const std::string &src_name, const std::string &dst_name,
                                      bool is_add, std::set<std::string> scope) {
        const FilteredRelDef &trig = defs_.fil.at(trigger_eid);
        std::vector<MaintInstr> root;
        std::vector<MaintInstr> *cursor = &root;
        for (int sib : defs_.defining_incoming(t)) {
            if (sib == trigger_eid) continue;
            FilteredRelDef &sf = defs_.fil.at(sib);
            sf.store_live = true;
            MaintInstr instr;
            if (sf.src_var == trig.src_var) {
                instr.op = MaintInstr::Op::IfMember;
                instr.rel = sf.base.with_filter();
                instr.key_vars = {src_name, dst_name};
                instr.cost = "1";
            } else {
                instr.op = MaintInstr::Op::ForImage;
                instr.rel = sf.base.inverted().with_filter();
                instr.out_vars = {fresh_name(sf.src_var, scope)};
                instr.out_comps = {1};
                instr.key_vars = {dst_name};
                instr.key_comps = {2};
                instr.cost = "#img(" + instr.rel.to_string() + "){" + dst_name + "}";
            }
            cursor->push_back(std::move(instr));
            cursor = &cursor->back().body;
        }
        MaintInstr upd;
        upd.op = MaintInstr::Op::TagUpd;
        upd.is_add = is_add;
        upd.rel = RelId::tag(t.var);
        upd.var = dst_name;
        upd.cost = "1";
        upd.body = tag_transition(t.var, dst_name, is_add, scope);
        cursor->push_back(std::move(upd));
        return root;
    }

    /// Cascade run when a tag set gains/loses the member bound to
    /// `member_name`: every active outgoing edge gains/loses the pairs
    /// sourced at that member.
    std::vector<MaintInstr> tag_transition(const std::string &v, const std::string &member_name,
                                           bool is_add, const std::set<std::string> &scope) {
        std::vector<MaintInstr> out;
        for (int eid : defs_.d_edges) {
            const FilteredRelDef &f = defs_.fil.at(eid);
            if (f.src_var != v || !f.active) continue;
            std::set<std::string> inner = scope;
            std::string dst = fresh_name(f.dst_var, inner);
            MaintInstr loop;
            loop.op = MaintInstr::Op::ForImage;
            loop.rel = f.base; // forward virtual relation
            loop.out_vars = {dst};
            loop.out_comps = {2};
            loop.key_vars = {member_name};
            loop.key_comps = {1};
            loop.cost = f.base.kind == RelId::Kind::Field
                            ? "1"
                            : "#img(" + f.base.to_string() + "){" + member_name + "}";
            loop.body = fil_event(eid, is_add, member_name, dst, inner);
            out.push_back(std::move(loop));
        }
        return out;
    }

    /// Invariant-local binding: rename when the vertex name is already used
    /// in the emitted context.
    static std::string fresh_name(const std::string &base, std::set<std::string> &scope) {
        std::string name = base;
        int n = 0;
        while (scope.count(name)) name = base + "$" + std::to_string(++n);
        scope.insert(name);
        return name;
    }

private:
    const QueryGraph &g_;
    FilterDefs &defs_;
};

/// Finds the edge carrying a given occurrence-labeled relation.
const Edge *edge_for_occurrence(const QueryGraph &g, const RelId &rel) {
    for (const auto &e : g.edges) {
        if (e.label.kind != rel.kind || e.label.name != rel.name) continue;
        if (e.label.occurrence == rel.occurrence) return &e;
    }
    return nullptr;
}

void rewrite_instrs(std::vector<MaintInstr> &instrs, const QueryGraph &g, FilterDefs &defs) {
    for (auto &i : instrs) {
        if (i.op == MaintInstr::Op::ForImage && i.rel.inverse && !i.rel.filtered &&
            (i.rel.kind == RelId::Kind::Field || i.rel.kind == RelId::Kind::Member)) {
            RelId fwd = i.rel;
            fwd.inverse = false;
            const Edge *e = edge_for_occurrence(g, fwd);
            if (e && defs.fil.count(e->id)) {
                i.rel = i.rel.with_filter();
                i.cost = "#img(" + i.rel.to_string() + "){" + i.key_vars[0] + "}";
                defs.fil.at(e->id).store_live = true;
            }
        }
        rewrite_instrs(i.body, g, defs);
    }
}

/// Tag tests guarding a result block, per the trigger edge. The test on a
/// field edge's target is implied by the source test when the field edge is
/// the target's only defining path.
std::vector<std::string> trigger_tag_tests(const Edge &e, const FilterDefs &defs) {
    std::vector<std::string> tested;
    auto want = [&defs, &tested](const std::string &v) {
        if (!defs.tags.count(v)) return;
        if (std::find(tested.begin(), tested.end(), v) == tested.end()) tested.push_back(v);
    };
    want(e.src());
    bool implied = e.label.kind == RelId::Kind::Field && !tested.empty();
    if (implied) {
        auto it = defs.tags.find(e.dst());
        if (it != defs.tags.end()) {
            auto defining = defs.defining_incoming(it->second);
            implied = defining.size() == 1 && defining[0] == e.id;
        } else {
            implied = false;
        }
    }
    if (!implied) want(e.dst());
    return tested;
}

} // namespace

MaintenancePlan plan_filtered(const RelationalQuery &rq, const Hints &hints, bool osq) {
    MaintenancePlan plan = plan_incremental(rq, hints);
    plan.filtered_mode = true;
    plan.osq = osq;
    if (!rq.has_demand_clause()) return plan; // degenerate: no demand to filter by
    auto shared_defs = std::make_shared<FilterDefs>();

    // Drop the incremental auxiliaries; they are re-derived after rewriting.
    plan.aux.clear();
    for (auto &[key, h] : plan.handlers) {
        auto &blocks = h.blocks;
        blocks.erase(std::remove_if(blocks.begin(), blocks.end(),
                                    [](const MaintBlock &b) { return b.id.rfind("aux", 0) == 0; }),
                     blocks.end());
    }

    *shared_defs = define_filter_invariants(plan.graph, rq, osq);
    FilterDefs &defs = *shared_defs;
    plan.filter_defs = shared_defs;

    // Rewrite result maintenance: redirect inverse images to filtered stores
    // and guard trigger handlers with tag-membership tests.
    for (auto &[key, h] : plan.handlers) {
        for (auto &b : h.blocks) {
            rewrite_instrs(b.instrs, plan.graph, defs);
            if (h.kind.rel.kind == RelId::Kind::Demand || b.trigger_edge < 0) continue;
            const Edge *trigger = plan.graph.find_edge(b.trigger_edge);
            if (!trigger) continue;
            std::vector<std::string> tests = trigger_tag_tests(*trigger, defs);
            for (auto rit = tests.rbegin(); rit != tests.rend(); ++rit) {
                defs.tags.at(*rit).live = true;
                MaintInstr guard;
                guard.op = MaintInstr::Op::TagTest;
                guard.rel = RelId::tag(*rit);
                guard.var = *rit;
                guard.cost = "1";
                guard.body = std::move(b.instrs);
                b.instrs.clear();
                b.instrs.push_back(std::move(guard));
            }
        }
    }

    PropagationEmitter emitter(plan.graph, defs);
    emitter.close_liveness();

    // Demand-propagation blocks, following the dependency chains.
    for (auto &[key, h] : plan.handlers) {
        std::vector<MaintBlock> prop;
        if (h.kind.rel.kind == RelId::Kind::Demand) {
            MaintBlock blk;
            blk.id = "aux[demand]";
            blk.params = rq.demand_params;
            std::set<std::string> scope(rq.demand_params.begin(), rq.demand_params.end());
            for (const auto &dp : rq.demand_params) {
                auto it = defs.tags.find(dp);
                if (it == defs.tags.end() || !it->second.live) continue;
                MaintInstr upd;
                upd.op = MaintInstr::Op::TagUpd;
                upd.is_add = h.kind.is_add;
                upd.rel = RelId::tag(dp);
                upd.var = dp;
                upd.cost = "1";
                upd.body = emitter.tag_transition(dp, dp, h.kind.is_add, scope);
                blk.instrs.push_back(std::move(upd));
            }
            if (!blk.instrs.empty()) prop.push_back(std::move(blk));
        } else {
            for (int eid : defs.d_edges) {
                const Edge *e = plan.graph.find_edge(eid);
                if (!e->label.same_base(h.kind.rel)) continue;
                const FilteredRelDef &f = defs.fil.at(eid);
                if (!f.active) continue;
                MaintBlock blk;
                blk.id = "aux[fil " + e->label.to_string() + "]";
                blk.params = e->vars;
                MaintInstr guard;
                guard.op = MaintInstr::Op::TagTest;
                guard.rel = RelId::tag(f.src_var);
                guard.var = e->vars[0];
                guard.cost = "1";
                guard.body = emitter.fil_event(eid, h.kind.is_add, e->vars[0], e->vars[1],
                                               {e->vars.begin(), e->vars.end()});
                blk.instrs.push_back(std::move(guard));
                prop.push_back(std::move(blk));
            }
        }
        // Rule 2/3: auxiliary maintenance precedes result maintenance on
        // addition and follows it on deletion.
        if (h.kind.is_add)
            h.blocks.insert(h.blocks.begin(), std::make_move_iterator(prop.begin()),
                            std::make_move_iterator(prop.end()));
        else
            h.blocks.insert(h.blocks.end(), std::make_move_iterator(prop.begin()),
                            std::make_move_iterator(prop.end()));
    }

    // Register live invariants for dumps and store instantiation.
    for (const auto &[v, t] : defs.tags) {
        if (!t.live) continue;
        AuxDef def;
        def.kind = AuxDef::Kind::TagSet;
        def.var = v;
        if (t.is_demand_param) {
            def.definition = "T_" + v + " = {" + v + ": (";
            for (size_t i = 0; i < rq.demand_params.size(); ++i)
                def.definition += (i ? "," : "") + rq.demand_params[i];
            def.definition += ") in U}";
        } else {
            def.definition = "T_" + v + " = {" + v + ":";
            auto defining = defs.defining_incoming(t);
            for (size_t i = 0; i < defining.size(); ++i) {
                const FilteredRelDef &f = defs.fil.at(defining[i]);
                def.definition += std::string(i ? "," : "") + " (" + f.src_var + "," + f.dst_var +
                                  ") in fil_" + f.base.to_string();
            }
            def.definition += "}";
        }
        plan.aux.push_back(std::move(def));
    }
    for (const auto &[eid, f] : defs.fil) {
        if (!f.store_live) continue;
        AuxDef def;
        def.kind = AuxDef::Kind::FilteredInverse;
        def.rel = f.base.inverted().with_filter();
        def.edge_id = eid;
        def.definition = def.rel.to_string() + " = {(" + f.dst_var + "," + f.src_var + "): (" +
                         f.src_var + "," + f.dst_var + ") in " + f.base.to_string() + ", " +
                         f.src_var + " in T_" + f.src_var + "}";
        plan.aux.push_back(std::move(def));
    }

    derive_auxiliary_relations(plan);
    return plan;
}

} // namespace incq
