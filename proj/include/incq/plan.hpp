#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "incq/graph.hpp"
#include "incq/relational.hpp"

namespace incq {

/// A fundamental update kind a handler responds to: the base relation
/// (F_f, M, or U) plus add/delete.
struct UpdateKind {
    RelId rel; // base identity: occurrence 0, no inverse/filter
    bool is_add = true;

    std::string key() const { return rel.base_name() + (is_add ? ":+" : ":-"); }
    bool operator<(const UpdateKind &o) const {
        if (!(rel == o.rel)) return rel < o.rel;
        return is_add < o.is_add;
    }
};

/// Relational maintenance instruction. Tree-structured: guards and loops nest,
/// leaves update stores. Phase 3 lowers each to guarded object operations.
struct MaintInstr {
    enum class Op {
        ForImage,   // out_vars <- img(rel.out_comps){key_comps = key_vars}; body
        IfMember,   // (key_vars) in rel; body
        IfTest,     // condition expression; body
        IfNotEqual, // (tuple_a) != (tuple_b); body  (self-join augmentation)
        TagTest,    // var in T_x; body
        ResultUpd,  // result add/del (key_vars..., value)
        StoreUpd,   // uncounted store add/del: rel[key_vars] +-= out_vars
        TagUpd,     // counted tag add/del of var; body runs on membership transitions
    };

    Op op;
    bool is_add = true; // ResultUpd/StoreUpd/TagUpd
    RelId rel;
    std::vector<std::string> out_vars;
    std::vector<int> out_comps;
    std::vector<std::string> key_vars;
    std::vector<int> key_comps;
    ExprPtr test;                              // IfTest
    std::vector<std::string> tuple_a, tuple_b; // IfNotEqual
    std::string var;                           // TagTest/TagUpd subject
    ExprPtr value;                             // ResultUpd value expression
    std::string cost;                          // annotation for dumps
    std::vector<MaintInstr> body;

    std::string head_string() const;
};

struct MaintBlock {
    std::string id;
    std::vector<std::string> params; // names bound from the update tuple, in component order
    int trigger_edge = -1;           // result blocks: the clause occurrence handled
    std::vector<MaintInstr> instrs;
};

struct Handler {
    UpdateKind kind;
    std::vector<MaintBlock> blocks; // already in rule-1..4 order
};

/// Auxiliary stores a plan maintains besides the result.
struct AuxDef {
    enum class Kind { InverseMap, UMap, TagSet, FilteredInverse, USet };
    Kind kind;
    RelId rel;                  // InverseMap: base inverted; FilteredInverse: occurrence inverted+filtered
    std::vector<int> key_comps; // UMap
    std::vector<int> val_comps; // UMap
    std::string var;            // TagSet vertex
    int edge_id = -1;           // FilteredInverse / TagSet incoming reference
    std::string definition;     // defining comprehension, for dumps

    std::string store_name() const;
};

/// Dump record of the orders the search considered for one trigger edge.
struct OrderDump {
    int trigger_edge = -1;
    std::string trigger_label;
    std::vector<AccessOrder> considered;
    int selected = 0;
    bool rank_tie_broken = false; // selection fell through to edge-id tie-break
};

struct FilterDefs;

struct MaintenancePlan {
    std::string query;
    RelationalQuery rq;
    QueryGraph graph;
    bool filtered_mode = false;
    bool osq = false;
    std::map<std::string, Handler> handlers; // keyed by UpdateKind::key()
    std::vector<AuxDef> aux;
    std::vector<OrderDump> orders;
    std::shared_ptr<const FilterDefs> filter_defs; // fil mode; used by invariant checks
    // Result retrieval: img(r){(p1,...,pk)}.
    bool result_counted = true;
};

/// The update kinds that can affect the query: U add/del when a demand clause
/// exists, plus add/del per distinct base relation among the clauses.
std::vector<UpdateKind> update_kinds(const RelationalQuery &rq);

/// Code generation for one access order: for-loops over images for unbound
/// variables, membership tests for bound ones, each condition inserted at the
/// earliest point its variables are bound, and a final counted result update.
MaintBlock generate_maintenance(const AccessOrder &order, const QueryGraph &g,
                                const RelationalQuery &rq, bool is_add, int trigger_edge,
                                std::vector<MaintInstr> extra_guards, const std::string &block_id);

/// Step 2-INC: result-maintenance handlers for every update kind, inverse and
/// demand-projection auxiliaries for the images they use, ordered per the
/// addition/deletion rules with self-join augmentation.
MaintenancePlan plan_incremental(const RelationalQuery &rq, const Hints &hints);

/// Registers inverse maps and demand projections referenced by handler images
/// and adds their maintenance blocks; unused auxiliaries are never created.
void derive_auxiliary_relations(MaintenancePlan &plan);

/// Rule-4 guards: in a handler with several blocks for occurrences of one
/// relation, block n tests that each earlier occurrence's tuple differs from
/// the update tuple.
std::vector<MaintInstr> self_join_guards(const QueryGraph &g, int trigger_edge,
                                         const std::vector<int> &earlier_edges);

std::string plan_to_json(const MaintenancePlan &plan);

} // namespace incq
