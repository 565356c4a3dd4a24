#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "incq/relational.hpp"

namespace incq {

/// Query graph: variables as vertices, relational clauses as labeled directed
/// edges; the demand clause is a directed hyperedge over (dp1,...,dpj).
struct Edge {
    int id = 0;
    RelId label;
    std::vector<std::string> vars; // component order; binary edges are (src, dst)

    bool is_hyper() const { return label.kind == RelId::Kind::Demand; }
    const std::string &src() const { return vars.front(); }
    const std::string &dst() const { return vars.back(); }
};

struct QueryGraph {
    std::vector<std::string> vertices;
    std::vector<Edge> edges;

    const Edge *find_edge(int id) const {
        for (const auto &e : edges)
            if (e.id == id) return &e;
        return nullptr;
    }
};

QueryGraph build_query_graph(const RelationalQuery &rq);

/// Cardinality hints, keyed "REL.j1,j2/i1,i2" (projected/bound component
/// lists); see cost_of_step for the keys each access uses.
using Hints = std::map<std::string, double>;

/// Parses hint lines of the form `rel.component-list/component-list = estimate`.
Hints parse_hints(const std::string &text, std::vector<std::string> &errors);

/// Symbolic access-cost ranks, cheapest first. A hinted factor with estimate
/// <= 1 behaves as Unit.
enum class CostRank { Unit = 0, DemandImage, FilteredImage, RelImage, FullScan };

std::string to_string(CostRank r);

struct CostFactor {
    CostRank rank = CostRank::Unit;
    std::string symbol;   // printable factor, e.g. #img(M^-1){user}
    std::string hint_key; // lookup key, e.g. M.1/2
    std::optional<double> hint;

    CostRank effective_rank() const {
        if (hint && *hint <= 1.0) return CostRank::Unit;
        return rank;
    }
};

/// Cost of covering `edge` next, given the set of already-bound variables.
/// Unit when fully bound or a field edge with bound source; an image factor
/// when partially bound (DemandImage for U); FullScan otherwise.
CostFactor cost_of_step(const Edge &edge, const std::set<std::string> &bound, const Hints &hints);

struct AccessStep {
    int edge_id = 0;
    std::vector<std::string> newly_bound;
    CostFactor cost;
};

struct AccessOrder {
    std::vector<std::string> bound_before; // bound by the triggering update
    std::vector<AccessStep> steps;         // covers every non-trigger edge exactly once

    std::vector<std::string> factor_symbols() const; // non-Unit, in step order
};

/// All growing edge covers that survive the heuristic: best-first expansion
/// of minimum-rank edges only, then pruning of orders whose non-Unit factor
/// multiset is a strict super-multiset of another's. Deterministic order.
std::vector<AccessOrder> enumerate_orders(const QueryGraph &g, int trigger_edge, const Hints &hints);

/// The minimum-cost order among the survivors: effective ranks sorted
/// descending compared lexicographically, then hint product, then edge ids.
AccessOrder search_access_order(const QueryGraph &g, int trigger_edge, const Hints &hints);

int compare_orders(const AccessOrder &a, const AccessOrder &b);

/// Effective non-Unit ranks, sorted descending: the primary comparison key.
std::vector<CostRank> order_rank_key(const AccessOrder &o);

} // namespace incq
