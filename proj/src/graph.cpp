#include "incq/graph.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace incq {

QueryGraph build_query_graph(const RelationalQuery &rq) {
    QueryGraph g;
    auto add_vertex = [&g](const std::string &v) {
        if (std::find(g.vertices.begin(), g.vertices.end(), v) == g.vertices.end())
            g.vertices.push_back(v);
    };
    int id = 0;
    for (const auto &cl : rq.rel_clauses) {
        Edge e;
        e.id = id++;
        e.label = cl.rel;
        e.vars = cl.lhs;
        for (const auto &v : e.vars) add_vertex(v);
        g.edges.push_back(std::move(e));
    }
    return g;
}

std::string to_string(CostRank r) {
    switch (r) {
        case CostRank::Unit: return "unit";
        case CostRank::DemandImage: return "demand-image";
        case CostRank::FilteredImage: return "filtered-image";
        case CostRank::RelImage: return "rel-image";
        case CostRank::FullScan: return "full-scan";
    }
    return "?";
}

Hints parse_hints(const std::string &text, std::vector<std::string> &errors) {
    Hints hints;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find("//");
        if (hash != std::string::npos) line.erase(hash);
        // trim
        auto l = line.find_first_not_of(" \t\r");
        if (l == std::string::npos) continue;
        auto r = line.find_last_not_of(" \t\r");
        line = line.substr(l, r - l + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("hints line " + std::to_string(lineno) + ": expected '='");
            continue;
        }
        std::string key = line.substr(0, eq);
        auto ke = key.find_last_not_of(" \t");
        key = key.substr(0, ke + 1);
        try {
            double v = std::stod(line.substr(eq + 1));
            if (v <= 0) throw std::invalid_argument("nonpositive");
            hints[key] = v;
        } catch (const std::exception &) {
            errors.push_back("hints line " + std::to_string(lineno) + ": bad estimate");
        }
    }
    return hints;
}

namespace {

std::string comp_list(const std::vector<int> &comps) {
    std::string s;
    for (size_t i = 0; i < comps.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(comps[i]);
    }
    return s;
}

std::string join_names(const std::vector<std::string> &xs) {
    std::string s;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += xs[i];
    }
    return s;
}

} // namespace

CostFactor cost_of_step(const Edge &edge, const std::set<std::string> &bound, const Hints &hints) {
    CostFactor f;
    std::vector<int> bound_comps, free_comps;
    std::vector<std::string> bound_vars, free_vars;
    for (size_t i = 0; i < edge.vars.size(); ++i) {
        bool b = bound.count(edge.vars[i]) != 0;
        (b ? bound_comps : free_comps).push_back(static_cast<int>(i) + 1);
        (b ? bound_vars : free_vars).push_back(edge.vars[i]);
    }
    std::string base = edge.label.base_name();

    if (free_comps.empty()) {
        f.rank = CostRank::Unit;
        f.symbol = "1";
        return f;
    }
    if (edge.is_hyper()) {
        if (bound_comps.empty()) {
            f.rank = CostRank::FullScan;
            f.symbol = "#" + base;
            f.hint_key = base;
        } else {
            // The demand set is relatively small; images over it rank below
            // other relation images.
            f.rank = CostRank::DemandImage;
            f.symbol = "#img(" + base + "." + comp_list(free_comps) + "){" + comp_list(bound_comps) +
                       "=" + join_names(bound_vars) + "}";
            f.hint_key = base + "." + comp_list(free_comps) + "/" + comp_list(bound_comps);
        }
    } else {
        bool src_bound = bound_comps.size() == 1 && bound_comps[0] == 1;
        if (bound_comps.empty()) {
            f.rank = CostRank::FullScan;
            f.symbol = "#" + base;
            f.hint_key = base;
        } else if (src_bound) {
            if (edge.label.kind == RelId::Kind::Field) {
                // Functional: at most one field value once the object is bound.
                f.rank = CostRank::Unit;
                f.symbol = "1";
                return f;
            }
            f.rank = CostRank::RelImage;
            f.symbol = "#img(" + base + "){" + edge.src() + "}";
            f.hint_key = base + ".2/1";
        } else {
            f.rank = CostRank::RelImage;
            f.symbol = "#img(" + base + "^-1){" + edge.dst() + "}";
            f.hint_key = base + ".1/2";
        }
    }
    auto it = hints.find(f.hint_key);
    if (it != hints.end()) f.hint = it->second;
    return f;
}

std::vector<std::string> AccessOrder::factor_symbols() const {
    std::vector<std::string> out;
    for (const auto &s : steps)
        if (s.cost.effective_rank() != CostRank::Unit) out.push_back(s.cost.symbol);
    return out;
}

namespace {

struct SearchState {
    std::set<std::string> bound;
    std::vector<bool> covered;
    std::vector<AccessStep> steps;
};

std::vector<CostRank> ranks_desc(const AccessOrder &o) {
    std::vector<CostRank> rs;
    for (const auto &s : o.steps) {
        CostRank r = s.cost.effective_rank();
        if (r != CostRank::Unit) rs.push_back(r);
    }
    std::sort(rs.begin(), rs.end(), std::greater<CostRank>());
    return rs;
}

double hint_product(const AccessOrder &o) {
    double p = 1.0;
    for (const auto &s : o.steps)
        if (s.cost.hint) p *= *s.cost.hint;
    return p;
}

std::vector<int> edge_seq(const AccessOrder &o) {
    std::vector<int> ids;
    for (const auto &s : o.steps) ids.push_back(s.edge_id);
    return ids;
}

/// True when a's non-Unit factor multiset is a sub-multiset of b's: a is
/// symbolically at most as costly as b for every possible cardinality.
bool dominates(const AccessOrder &a, const AccessOrder &b) {
    std::map<std::string, int> need;
    for (const auto &sym : a.factor_symbols()) need[sym]++;
    for (const auto &sym : b.factor_symbols()) {
        auto it = need.find(sym);
        if (it != need.end() && it->second > 0) --it->second;
    }
    for (const auto &[sym, n] : need)
        if (n > 0) return false;
    return true;
}

constexpr size_t kMaxExpandedStates = 10000;

} // namespace

std::vector<CostRank> order_rank_key(const AccessOrder &o) { return ranks_desc(o); }

int compare_orders(const AccessOrder &a, const AccessOrder &b) {
    auto ra = ranks_desc(a), rb = ranks_desc(b);
    if (ra != rb) return ra < rb ? -1 : 1;
    double ha = hint_product(a), hb = hint_product(b);
    if (ha != hb) return ha < hb ? -1 : 1;
    auto ea = edge_seq(a), eb = edge_seq(b);
    if (ea != eb) return ea < eb ? -1 : 1;
    return 0;
}

std::vector<AccessOrder> enumerate_orders(const QueryGraph &g, int trigger_edge, const Hints &hints) {
    const Edge *trigger = g.find_edge(trigger_edge);
    assert(trigger && "trigger edge must exist");

    SearchState init;
    init.covered.assign(g.edges.size(), false);
    for (size_t i = 0; i < g.edges.size(); ++i)
        if (g.edges[i].id == trigger_edge) init.covered[i] = true;
    for (const auto &v : trigger->vars) init.bound.insert(v);

    std::vector<AccessOrder> complete;
    std::vector<SearchState> stack{std::move(init)};
    size_t expanded = 0;

    while (!stack.empty()) {
        SearchState st = std::move(stack.back());
        stack.pop_back();

        // Find the cheapest rank among uncovered edges.
        CostRank best = CostRank::FullScan;
        bool done = true;
        std::vector<std::pair<size_t, CostFactor>> candidates;
        for (size_t i = 0; i < g.edges.size(); ++i) {
            if (st.covered[i]) continue;
            done = false;
            CostFactor f = cost_of_step(g.edges[i], st.bound, hints);
            if (f.effective_rank() < best) {
                best = f.effective_rank();
                candidates.clear();
            }
            if (f.effective_rank() == best) candidates.emplace_back(i, std::move(f));
        }
        if (done) {
            AccessOrder ord;
            ord.bound_before = trigger->vars;
            ord.steps = std::move(st.steps);
            complete.push_back(std::move(ord));
            continue;
        }

        // Unit steps are free and never branch; take the smallest edge id.
        // Past the state cap, complete greedily the same way.
        bool greedy = ++expanded > kMaxExpandedStates;
        size_t n = (best == CostRank::Unit || greedy) ? 1 : candidates.size();
        // Depth-first stack: push in reverse so smaller edge ids expand first.
        for (size_t k = n; k-- > 0;) {
            auto &[idx, cost] = candidates[k];
            SearchState next = (k == 0) ? std::move(st) : st;
            next.covered[idx] = true;
            AccessStep step;
            step.edge_id = g.edges[idx].id;
            step.cost = cost;
            for (const auto &v : g.edges[idx].vars)
                if (next.bound.insert(v).second) step.newly_bound.push_back(v);
            next.steps.push_back(std::move(step));
            stack.push_back(std::move(next));
        }
    }

    // Prune symbolically dominated orders; among equal-cost orders keep the
    // lexicographically smallest edge sequence.
    std::vector<AccessOrder> survivors;
    for (size_t i = 0; i < complete.size(); ++i) {
        bool keep = true;
        for (size_t j = 0; j < complete.size() && keep; ++j) {
            if (i == j) continue;
            if (!dominates(complete[j], complete[i])) continue;
            if (dominates(complete[i], complete[j])) {
                // Equal multisets: keep the smaller edge sequence only.
                if (edge_seq(complete[j]) < edge_seq(complete[i])) keep = false;
            } else {
                keep = false;
            }
        }
        if (keep) survivors.push_back(complete[i]);
    }
    std::sort(survivors.begin(), survivors.end(),
              [](const AccessOrder &a, const AccessOrder &b) { return edge_seq(a) < edge_seq(b); });
    return survivors;
}

AccessOrder search_access_order(const QueryGraph &g, int trigger_edge, const Hints &hints) {
    std::vector<AccessOrder> orders = enumerate_orders(g, trigger_edge, hints);
    assert(!orders.empty());
    const AccessOrder *best = &orders[0];
    for (const auto &o : orders)
        if (compare_orders(o, *best) < 0) best = &o;
    return *best;
}

} // namespace incq
