#include <map>
#include <sstream>

#include "incq/demand.hpp"
#include "incq/runtime.hpp"

namespace incq {

namespace {
const Value kUnitKey = Value::tuple({});
}

/// From-scratch recomputation of every maintained store. Test-mode only;
/// throws std::logic_error with a description of the first mismatch.
class InvariantChecker {
public:
    explicit InvariantChecker(const Runtime &rt) : rt_(rt) {}

    void run() {
        for (const auto &qs : rt_.states_) check_query(qs);
    }

private:
    using Multiset = std::map<Value, int64_t>;

    static void fail(const std::string &what) { throw std::logic_error("invariant violated: " + what); }

    DemandTuples demand_tuples(const Runtime::QueryState &qs) const {
        DemandTuples out;
        const CountedSet *img = qs.stores[qs.cq.oplan.uset_store].image(kUnitKey);
        if (!img) return out;
        size_t arity = qs.cq.spec.demand_params.size();
        img->for_each([&](const Value &v) {
            if (arity == 1)
                out.push_back({v});
            else
                out.push_back(v.elems());
        });
        return out;
    }

    void check_query(const Runtime::QueryState &qs) const {
        if (qs.cq.oplan.uset_store < 0) return;
        DemandTuples demand = demand_tuples(qs);
        check_result(qs, demand);
        if (qs.cq.mplan.filter_defs) check_filters(qs, demand);
    }

    void check_result(const Runtime::QueryState &qs, const DemandTuples &demand) const {
        auto expected = count_derivations(qs.cq.rq, rt_.heap_, demand);
        const CountedMap &r = qs.stores[qs.cq.oplan.result_store];
        size_t live_pairs = 0;
        r.for_each_key([&](const Value &k) {
            r.image(k)->for_each_counted([&](const Value &v, int32_t c) {
                ++live_pairs;
                auto it = expected.find({k, v});
                if (it == expected.end())
                    fail(qs.cq.spec.name + ": result has extra " + k.to_string() + "->" +
                         v.to_string());
                if (r.counted() && it->second != c)
                    fail(qs.cq.spec.name + ": result count for " + k.to_string() + "->" +
                         v.to_string() + " is " + std::to_string(c) + ", want " +
                         std::to_string(it->second));
            });
        });
        if (live_pairs != expected.size())
            fail(qs.cq.spec.name + ": result is missing derivations (" +
                 std::to_string(live_pairs) + " live vs " + std::to_string(expected.size()) +
                 " expected)");
    }

    /// Forward witnesses of one demand-subgraph edge from a tag multiset:
    /// (dst -> number of live tagged sources reaching it).
    Multiset edge_witnesses(const FilteredRelDef &f, const Multiset &src_tag) const {
        Multiset wit;
        for (const auto &[u, c] : src_tag) {
            if (c <= 0) continue;
            if (f.base.kind == RelId::Kind::Field) {
                auto v = rt_.heap_.get_field(u, f.base.name);
                if (v) wit[*v] += 1;
            } else if (u.is_set()) {
                rt_.heap_.set_elems(u).for_each([&wit](const Value &e) { wit[e] += 1; });
            }
        }
        return wit;
    }

    void check_filters(const Runtime::QueryState &qs, const DemandTuples &demand) const {
        const FilterDefs &defs = *qs.cq.mplan.filter_defs;

        // Tags in dependency order (the demand subgraph is acyclic).
        std::map<std::string, Multiset> tags;
        auto computed = [&tags](const std::string &v) { return tags.count(v) != 0; };
        bool progress = true;
        while (progress) {
            progress = false;
            for (const auto &[var, t] : defs.tags) {
                if (computed(var)) continue;
                if (t.is_demand_param) {
                    Multiset m;
                    for (const auto &tup : demand) m[tup[t.dp_comp - 1]] += 1;
                    tags.emplace(var, std::move(m));
                    progress = true;
                    continue;
                }
                auto defining = defs.defining_incoming(t);
                bool ready = true;
                for (int eid : defining)
                    if (!computed(defs.fil.at(eid).src_var)) ready = false;
                if (!ready || defining.empty()) continue;
                // Intersection with per-combination counts: the product of
                // per-edge witness counts.
                std::vector<Multiset> wits;
                for (int eid : defining)
                    wits.push_back(edge_witnesses(defs.fil.at(eid), tags.at(defs.fil.at(eid).src_var)));
                Multiset m = wits[0];
                for (size_t i = 1; i < wits.size(); ++i) {
                    Multiset next;
                    for (const auto &[v, c] : m) {
                        auto it = wits[i].find(v);
                        if (it != wits[i].end()) next[v] = c * it->second;
                    }
                    m = std::move(next);
                }
                tags.emplace(var, std::move(m));
                progress = true;
            }
        }

        for (const auto &[var, t] : defs.tags) {
            if (!t.live || !computed(var)) continue;
            int idx = qs.cq.oplan.store_index("T_" + var);
            if (idx < 0) continue;
            const CountedMap &store = qs.stores[idx];
            const Multiset &want = tags.at(var);
            size_t live = 0;
            if (const CountedSet *img = store.image(kUnitKey))
                img->for_each_counted([&](const Value &v, int32_t c) {
                    ++live;
                    auto it = want.find(v);
                    if (it == want.end() || it->second != c)
                        fail(qs.cq.spec.name + ": tag T_" + var + " has " + v.to_string() + "x" +
                             std::to_string(c) + ", want x" +
                             std::to_string(it == want.end() ? 0 : it->second));
                });
            size_t want_live = 0;
            for (const auto &[v, c] : want)
                if (c > 0) ++want_live;
            if (live != want_live)
                fail(qs.cq.spec.name + ": tag T_" + var + " has " + std::to_string(live) +
                     " members, want " + std::to_string(want_live));
        }

        size_t filter_space = 0;
        for (const auto &[eid, f] : defs.fil) {
            if (!f.store_live) continue;
            std::string name = f.base.inverted().with_filter().to_string();
            int idx = qs.cq.oplan.store_index(name);
            if (idx < 0) continue;
            const CountedMap &store = qs.stores[idx];
            if (!computed(f.src_var)) continue;
            // Expected: (dst -> sources) for live tagged sources.
            std::map<Value, std::map<Value, bool>> expect;
            for (const auto &[u, c] : tags.at(f.src_var)) {
                if (c <= 0) continue;
                if (f.base.kind == RelId::Kind::Field) {
                    auto v = rt_.heap_.get_field(u, f.base.name);
                    if (v) expect[*v][u] = true;
                } else if (u.is_set()) {
                    rt_.heap_.set_elems(u).for_each([&](const Value &e) { expect[e][u] = true; });
                }
            }
            size_t want_pairs = 0;
            for (const auto &[d, srcs] : expect) want_pairs += srcs.size();
            size_t have_pairs = 0;
            store.for_each_key([&](const Value &k) {
                store.image(k)->for_each([&](const Value &v) {
                    ++have_pairs;
                    auto it = expect.find(k);
                    if (it == expect.end() || !it->second.count(v))
                        fail(qs.cq.spec.name + ": " + name + " has extra (" + k.to_string() +
                             "," + v.to_string() + ")");
                });
            });
            if (have_pairs != want_pairs)
                fail(qs.cq.spec.name + ": " + name + " has " + std::to_string(have_pairs) +
                     " pairs, want " + std::to_string(want_pairs));
            filter_space += have_pairs;
        }

        // Space bound: tag and filtered contents stay within the data
        // reachable from demand, so never exceed the base relations.
        size_t tag_space = 0;
        for (const auto &[var, t] : defs.tags) {
            int idx = qs.cq.oplan.store_index("T_" + var);
            if (idx >= 0)
                if (const CountedSet *img = qs.stores[idx].image(kUnitKey)) tag_space += img->size();
        }
        size_t base_pairs = 0;
        rt_.heap_.for_each_member_pair([&](const Value &, const Value &) { ++base_pairs; });
        for (const auto &fname : rt_.heap_.field_names())
            rt_.heap_.for_each_field_pair(fname, [&](const Value &, const Value &) { ++base_pairs; });
        size_t u_vals = demand.size() * std::max<size_t>(1, qs.cq.spec.demand_params.size());
        if (tag_space + filter_space > 2 * base_pairs + u_vals)
            fail(qs.cq.spec.name + ": auxiliary space exceeds reachable data bound");
    }

    const Runtime &rt_;
};

void Runtime::check_all_invariants() const { InvariantChecker(*this).run(); }

} // namespace incq
