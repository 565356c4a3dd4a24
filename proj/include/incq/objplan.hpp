#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "incq/plan.hpp"

namespace incq {

/// A store the runtime materializes for one compiled query.
struct StoreDesc {
    enum class Kind { Result, USet, UMap, InverseMap, FilteredInverse, TagSet };
    Kind kind;
    bool counted = false;
    std::string name;           // r, U, U.1/2, M^-1, S(M^-1)_2, T_user
    std::vector<int> key_comps; // UMap
    std::vector<int> val_comps; // UMap
};

/// Guarded object/heap instruction. Field and member accesses carry their
/// hasfield/isset guards; keyed-map reads carry domain guards. A guard that
/// fails simply skips the body.
struct ObjInstr {
    enum class Op {
        HasFieldBind,  // if a hasfield field: out[0] = a.field; body
        FieldEqTest,   // if a hasfield field and a.field == b: body
        IsSetForElem,  // if a isset: for out[0] in a: body
        IsSetElemTest, // if a isset and b in a: body
        MapForImage,   // if key in dom(store): for out... in img(store){key}: body
        MapMemberTest, // if val in img(store){key}: body   (U set: empty key)
        TagTest,       // if a in store: body
        CondTest,      // if expr: body       (evaluation error skips)
        NotEqualTest,  // if (slots_a) != (slots_b): body
        TagCAdd,       // store.cadd(a); body on 0->1
        TagCDel,       // store.cdel(a); body on 1->0
        StoreAdd,      // store.add(key, val)
        StoreDel,      // store.del(key, val)
        ResultUpd,     // store.(c)add/(c)del((key...), value-expr)
    };

    Op op;
    int store = -1;
    std::string field;
    int a = -1; // object/set/element slot
    int b = -1; // second operand slot
    std::vector<int> key_slots;
    std::vector<int> out_slots;
    std::vector<int> slots_a, slots_b; // NotEqualTest
    ExprPtr expr;                      // CondTest / ResultUpd value
    bool is_add = true;
    std::string note; // display text for dumps and trace logs
    std::vector<ObjInstr> body;
};

struct ObjBlock {
    std::string id;
    size_t n_params = 0;
    std::vector<std::string> slot_names; // params first
    std::map<std::string, int> slot_of;
    std::vector<ObjInstr> instrs;
};

struct ObjHandler {
    UpdateKind kind;
    std::vector<ObjBlock> blocks;
};

struct ObjPlan {
    std::string query;
    std::vector<std::string> params;
    std::vector<std::string> demand_params;
    bool filtered_mode = false;
    bool osq = false;
    bool result_counted = true;
    std::vector<StoreDesc> stores;
    int result_store = -1;
    int uset_store = -1;
    std::vector<int> umap_stores;
    std::map<std::string, ObjHandler> handlers;

    int store_index(const std::string &name) const {
        for (size_t i = 0; i < stores.size(); ++i)
            if (stores[i].name == name) return static_cast<int>(i);
        return -1;
    }
};

/// Phase 3: lowers every relational instruction to guarded object operations
/// per the transformation table and resolves variables to frame slots.
ObjPlan lower_plan(const MaintenancePlan &plan);

/// Counting elimination for the result store: plain add/del when every update
/// kind the script can produce is an addition, or when each result element
/// has a unique derivation (every variable determined by a parameter or
/// result variable through field edges, and the result expression injective).
/// Filtered relations are always uncounted; tag sets stay counted.
void eliminate_counts(ObjPlan &plan, const RelationalQuery &rq,
                      const std::vector<UpdateKind> &script_kinds);

/// The uniqueness condition above, on its own (used by tests).
bool unique_derivations(const RelationalQuery &rq);

std::string objplan_to_json(const ObjPlan &plan);

} // namespace incq
