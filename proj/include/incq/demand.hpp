#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "incq/plan.hpp"

namespace incq {

/// Subset of the query graph that can carry demand to a variable.
struct DemandSubgraph {
    std::string target;
    std::vector<int> edges; // ascending edge ids
};

struct TagSetDef {
    std::string var;
    bool is_demand_param = false;
    int dp_comp = 0;           // 1-based component in the U tuple
    std::vector<int> incoming; // incoming edges in the demand subgraph, ascending
    bool live = false;
};

struct FilteredRelDef {
    int edge_id = -1;
    RelId base;         // occurrence-labeled field/member relation
    std::string src_var;
    std::string dst_var;
    bool store_live = false; // the materialized inverse S(base^-1)_occ
    bool active = false;     // events on this edge are tracked at all
};

struct FilterDefs {
    bool osq = false;
    std::map<std::string, TagSetDef> tags;  // by vertex
    std::map<int, FilteredRelDef> fil;      // by edge id
    std::vector<int> d_edges;               // demand subgraph union, ascending

    /// Incoming edges that define a tag under the active strategy: all of
    /// them, or only the first membership path for the OSQ comparison
    /// strategy.
    std::vector<int> defining_incoming(const TagSetDef &t) const {
        if (!osq || t.incoming.size() <= 1) return t.incoming;
        return {t.incoming.front()};
    }
};

/// Maximal directed acyclic subgraph reaching `var` from the demand-parameter
/// vertices; cycles are broken by preferring smaller edge ids.
DemandSubgraph find_demand_subgraph(const QueryGraph &g, const RelationalQuery &rq,
                                    const std::string &var);

/// Tag-set and filtered-relation definitions over the union of demand
/// subgraphs for every retrieved or trigger variable. Forward filtered
/// relations are omitted (base relation plus source-tag test); only inverse
/// stores materialize.
FilterDefs define_filter_invariants(const QueryGraph &g, const RelationalQuery &rq, bool osq);

/// Step 2-FIL: rewrites the incremental plan to use filtered relations and
/// tag guards, generates demand-propagation maintenance for every live
/// invariant, and orders all blocks (auxiliaries before results on addition,
/// after on deletion).
MaintenancePlan plan_filtered(const RelationalQuery &rq, const Hints &hints, bool osq);

} // namespace incq
