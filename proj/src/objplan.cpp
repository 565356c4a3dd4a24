#include "incq/objplan.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

namespace incq {

namespace {

std::string comp_list(const std::vector<int> &comps) {
    std::string s;
    for (size_t i = 0; i < comps.size(); ++i) s += (i ? "," : "") + std::to_string(comps[i]);
    return s;
}

class Lowering {
public:
    explicit Lowering(const MaintenancePlan &plan) : plan_(plan) {}

    ObjPlan run() {
        out_.query = plan_.query;
        out_.params = plan_.rq.params;
        out_.demand_params = plan_.rq.demand_params;
        out_.filtered_mode = plan_.filtered_mode;
        out_.osq = plan_.osq;
        out_.result_counted = plan_.result_counted;

        StoreDesc result{StoreDesc::Kind::Result, plan_.result_counted, "r", {}, {}};
        out_.stores.push_back(result);
        out_.result_store = 0;
        for (const auto &a : plan_.aux) {
            StoreDesc d;
            d.name = a.store_name();
            switch (a.kind) {
                case AuxDef::Kind::InverseMap: d.kind = StoreDesc::Kind::InverseMap; break;
                case AuxDef::Kind::FilteredInverse: d.kind = StoreDesc::Kind::FilteredInverse; break;
                case AuxDef::Kind::TagSet:
                    d.kind = StoreDesc::Kind::TagSet;
                    d.counted = true;
                    break;
                case AuxDef::Kind::USet: d.kind = StoreDesc::Kind::USet; break;
                case AuxDef::Kind::UMap:
                    d.kind = StoreDesc::Kind::UMap;
                    d.key_comps = a.key_comps;
                    d.val_comps = a.val_comps;
                    break;
            }
            if (d.kind == StoreDesc::Kind::USet) out_.uset_store = static_cast<int>(out_.stores.size());
            if (d.kind == StoreDesc::Kind::UMap) out_.umap_stores.push_back(static_cast<int>(out_.stores.size()));
            out_.stores.push_back(std::move(d));
        }

        for (const auto &[key, h] : plan_.handlers) {
            ObjHandler oh;
            oh.kind = h.kind;
            for (const auto &b : h.blocks) oh.blocks.push_back(lower_block(b));
            out_.handlers.emplace(key, std::move(oh));
        }
        return out_;
    }

private:
    ObjBlock *block_ = nullptr;

    int slot(const std::string &var) {
        auto it = block_->slot_of.find(var);
        if (it != block_->slot_of.end()) return it->second;
        int s = static_cast<int>(block_->slot_names.size());
        block_->slot_names.push_back(var);
        block_->slot_of.emplace(var, s);
        return s;
    }

    int require_store(const std::string &name) {
        int idx = out_.store_index(name);
        if (idx < 0) throw std::logic_error("plan references unknown store " + name);
        return idx;
    }

    int umap_store(const std::vector<int> &key_comps, const std::vector<int> &val_comps) {
        std::string name = "U." + comp_list(val_comps) + "/" + comp_list(key_comps);
        return require_store(name);
    }

    ObjBlock lower_block(const MaintBlock &b) {
        ObjBlock ob;
        block_ = &ob;
        ob.id = b.id;
        for (const auto &p : b.params) slot(p);
        ob.n_params = b.params.size();
        ob.instrs = lower_list(b.instrs);
        block_ = nullptr;
        return ob;
    }

    std::vector<ObjInstr> lower_list(const std::vector<MaintInstr> &instrs) {
        std::vector<ObjInstr> out;
        for (const auto &i : instrs) {
            ObjInstr o = lower_instr(i);
            o.body = lower_list(i.body);
            out.push_back(std::move(o));
        }
        return out;
    }

    ObjInstr lower_instr(const MaintInstr &i) {
        ObjInstr o;
        o.note = i.head_string();
        switch (i.op) {
            case MaintInstr::Op::ForImage: return lower_for_image(i);
            case MaintInstr::Op::IfMember: return lower_if_member(i);
            case MaintInstr::Op::IfTest:
                o.op = ObjInstr::Op::CondTest;
                o.expr = i.test;
                return o;
            case MaintInstr::Op::IfNotEqual:
                o.op = ObjInstr::Op::NotEqualTest;
                for (const auto &v : i.tuple_a) o.slots_a.push_back(slot(v));
                for (const auto &v : i.tuple_b) o.slots_b.push_back(slot(v));
                return o;
            case MaintInstr::Op::TagTest:
                o.op = ObjInstr::Op::TagTest;
                o.store = require_store(i.rel.to_string());
                o.a = slot(i.var);
                return o;
            case MaintInstr::Op::TagUpd:
                o.op = i.is_add ? ObjInstr::Op::TagCAdd : ObjInstr::Op::TagCDel;
                o.store = require_store(i.rel.to_string());
                o.a = slot(i.var);
                o.is_add = i.is_add;
                return o;
            case MaintInstr::Op::StoreUpd:
                o.op = i.is_add ? ObjInstr::Op::StoreAdd : ObjInstr::Op::StoreDel;
                o.store = require_store(i.rel.to_string());
                for (const auto &v : i.key_vars) o.key_slots.push_back(slot(v));
                for (const auto &v : i.out_vars) o.out_slots.push_back(slot(v));
                o.is_add = i.is_add;
                return o;
            case MaintInstr::Op::ResultUpd:
                o.op = ObjInstr::Op::ResultUpd;
                o.store = out_.result_store;
                for (const auto &v : i.key_vars) o.key_slots.push_back(slot(v));
                o.expr = i.value;
                o.is_add = i.is_add;
                o.note = (out_.result_counted ? std::string("r.c") : std::string("r.")) +
                         (i.is_add ? "add" : "del") + " " + o.note.substr(o.note.find('('));
                return o;
        }
        throw std::logic_error("unhandled instruction");
    }

    ObjInstr lower_for_image(const MaintInstr &i) {
        ObjInstr o;
        o.note = i.head_string();
        if (i.rel.kind == RelId::Kind::Demand) {
            o.op = ObjInstr::Op::MapForImage;
            o.store = umap_store(i.key_comps, i.out_comps);
            for (const auto &v : i.key_vars) o.key_slots.push_back(slot(v));
            for (const auto &v : i.out_vars) o.out_slots.push_back(slot(v));
            return o;
        }
        if (i.rel.filtered || (i.rel.inverse && (i.rel.kind == RelId::Kind::Field ||
                                                 i.rel.kind == RelId::Kind::Member))) {
            std::string name = i.rel.filtered ? i.rel.to_string() : [&] {
                RelId base = i.rel;
                base.occurrence = 0; // one physical inverse map per relation
                return base.to_string();
            }();
            o.op = ObjInstr::Op::MapForImage;
            o.store = require_store(name);
            assert(i.key_vars.size() == 1 && i.out_vars.size() == 1);
            o.key_slots.push_back(slot(i.key_vars[0]));
            o.out_slots.push_back(slot(i.out_vars[0]));
            return o;
        }
        if (i.rel.kind == RelId::Kind::Field) {
            assert(i.key_comps == std::vector<int>{1} && "field images are keyed by the object");
            o.op = ObjInstr::Op::HasFieldBind;
            o.field = i.rel.name;
            o.a = slot(i.key_vars[0]);
            o.out_slots.push_back(slot(i.out_vars[0]));
            return o;
        }
        assert(i.rel.kind == RelId::Kind::Member && i.key_comps == std::vector<int>{1});
        o.op = ObjInstr::Op::IsSetForElem;
        o.a = slot(i.key_vars[0]);
        o.out_slots.push_back(slot(i.out_vars[0]));
        return o;
    }

    ObjInstr lower_if_member(const MaintInstr &i) {
        ObjInstr o;
        o.note = i.head_string();
        if (i.rel.kind == RelId::Kind::Demand) {
            o.op = ObjInstr::Op::MapMemberTest;
            o.store = out_.uset_store;
            for (const auto &v : i.key_vars) o.out_slots.push_back(slot(v));
            return o;
        }
        if (i.rel.filtered) {
            // (src,dst) in fil_e, tested via the inverse store keyed by dst.
            o.op = ObjInstr::Op::MapMemberTest;
            o.store = require_store(i.rel.inverted().to_string());
            o.key_slots.push_back(slot(i.key_vars[1]));
            o.out_slots.push_back(slot(i.key_vars[0]));
            return o;
        }
        if (i.rel.kind == RelId::Kind::Field) {
            o.op = ObjInstr::Op::FieldEqTest;
            o.field = i.rel.name;
            o.a = slot(i.key_vars[0]);
            o.b = slot(i.key_vars[1]);
            return o;
        }
        assert(i.rel.kind == RelId::Kind::Member);
        o.op = ObjInstr::Op::IsSetElemTest;
        o.a = slot(i.key_vars[0]);
        o.b = slot(i.key_vars[1]);
        return o;
    }

    const MaintenancePlan &plan_;
    ObjPlan out_;
};

} // namespace

ObjPlan lower_plan(const MaintenancePlan &plan) { return Lowering(plan).run(); }

bool unique_derivations(const RelationalQuery &rq) {
    // (2) the result expression returns different values for different
    // variable combinations: a variable or a tuple of distinct variables.
    std::vector<std::string> result_vars;
    if (rq.result->kind == Expr::Kind::Var) {
        result_vars.push_back(rq.result->name);
    } else if (rq.result->kind == Expr::Kind::TupleCtor) {
        for (const auto &c : rq.result->children) {
            if (c->kind != Expr::Kind::Var) return false;
            if (std::find(result_vars.begin(), result_vars.end(), c->name) != result_vars.end())
                return false;
            result_vars.push_back(c->name);
        }
    } else {
        return false;
    }

    // (1) every query variable is a parameter, a result variable, or
    // functionally determined from one via field edges.
    std::set<std::string> known(rq.params.begin(), rq.params.end());
    known.insert(result_vars.begin(), result_vars.end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto &cl : rq.rel_clauses)
            if (cl.rel.kind == RelId::Kind::Field && known.count(cl.lhs[0]) &&
                !known.count(cl.lhs[1])) {
                known.insert(cl.lhs[1]);
                changed = true;
            }
    }
    for (const auto &cl : rq.rel_clauses)
        for (const auto &v : cl.lhs)
            if (!known.count(v)) return false;
    return true;
}

void eliminate_counts(ObjPlan &plan, const RelationalQuery &rq,
                      const std::vector<UpdateKind> &script_kinds) {
    bool deletions = false;
    for (const auto &k : script_kinds)
        if (!k.is_add && plan.handlers.count(k.key())) deletions = true;
    bool uncounted = !deletions || unique_derivations(rq);
    if (!uncounted) return;
    plan.result_counted = false;
    plan.stores[plan.result_store].counted = false;
    for (auto &[key, h] : plan.handlers)
        for (auto &b : h.blocks) {
            std::function<void(std::vector<ObjInstr> &)> fix = [&](std::vector<ObjInstr> &instrs) {
                for (auto &i : instrs) {
                    if (i.op == ObjInstr::Op::ResultUpd && i.store == plan.result_store) {
                        auto paren = i.note.find('(');
                        i.note = std::string("r.") + (i.is_add ? "add" : "del") + " " +
                                 (paren == std::string::npos ? "" : i.note.substr(paren));
                    }
                    fix(i.body);
                }
            };
            fix(b.instrs);
        }
}

namespace {

using nlohmann::json;

json obj_instr_json(const ObjInstr &i, const ObjBlock &b) {
    json arr = json::array();
    std::string head;
    auto sn = [&b](int s) { return s >= 0 ? b.slot_names[s] : std::string("?"); };
    switch (i.op) {
        case ObjInstr::Op::HasFieldBind:
            head = "if " + sn(i.a) + " hasfield " + i.field + ": " + sn(i.out_slots[0]) + " = " +
                   sn(i.a) + "." + i.field;
            break;
        case ObjInstr::Op::FieldEqTest:
            head = "if " + sn(i.a) + " hasfield " + i.field + " and " + sn(i.a) + "." + i.field +
                   " == " + sn(i.b);
            break;
        case ObjInstr::Op::IsSetForElem:
            head = "if " + sn(i.a) + " isset: for " + sn(i.out_slots[0]) + " in " + sn(i.a);
            break;
        case ObjInstr::Op::IsSetElemTest:
            head = "if " + sn(i.a) + " isset and " + sn(i.b) + " in " + sn(i.a);
            break;
        default: head = i.note; break;
    }
    arr.push_back(head);
    if (!i.body.empty()) {
        json body = json::array();
        for (const auto &c : i.body) body.push_back(obj_instr_json(c, b));
        arr.push_back(body);
    }
    return arr;
}

} // namespace

std::string objplan_to_json(const ObjPlan &plan) {
    json j;
    j["query"] = plan.query;
    j["mode"] = plan.filtered_mode ? (plan.osq ? "fil-osq" : "fil") : "inc";
    j["result_counted"] = plan.result_counted;
    json stores = json::array();
    for (const auto &s : plan.stores) {
        json st;
        st["name"] = s.name;
        st["counted"] = s.counted;
        stores.push_back(st);
    }
    j["stores"] = stores;
    json handlers = json::object();
    for (const auto &[key, h] : plan.handlers) {
        json blocks = json::array();
        for (const auto &b : h.blocks) {
            json blk;
            blk["id"] = b.id;
            std::vector<std::string> params(b.slot_names.begin(),
                                            b.slot_names.begin() + b.n_params);
            blk["params"] = params;
            json instrs = json::array();
            for (const auto &i : b.instrs) instrs.push_back(obj_instr_json(i, b));
            blk["instrs"] = instrs;
            blocks.push_back(blk);
        }
        handlers[key] = blocks;
    }
    j["handlers"] = handlers;
    return j.dump(2);
}

} // namespace incq
