#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "incq/compiler.hpp"
#include "incq/counters.hpp"
#include "incq/heap.hpp"
#include "incq/runtime_eval.hpp"

namespace incq {

/// Raised on trace-level errors: unbound variables, type errors on updates,
/// asking undemanded arguments, failed assertions.
struct TraceError : std::runtime_error {
    size_t op_index;
    TraceError(size_t idx, const std::string &msg)
        : std::runtime_error("op " + std::to_string(idx) + ": " + msg), op_index(idx) {}
};

struct RuntimeOptions {
    Mode mode = Mode::Orig;
    bool auto_demand = false;
    bool check_against_orig = false; // every ask also runs the naive oracle
    bool check_invariants = false;   // from-scratch store checks after every op
    bool copy_results = false;       // asks materialize (and pay for) a copy
    bool use_relational_plans = false; // interpret relational plans instead of object plans
    std::ostream *trace_log = nullptr;
    std::ostream *ask_output = nullptr; // print each ask's result set
};

/// Executes one script in one mode: maintains the heap, demand sets, and all
/// materialized stores, dispatching updates to the compiled handlers.
/// Single-threaded; independent instances are unrelated.
class Runtime {
public:
    Runtime(const Script &script, std::vector<CompiledQuery> compiled, RuntimeOptions opts);

    size_t num_ops() const { return script_.trace.size(); }
    void run_op(size_t index);
    void run_all();
    void run_range(size_t begin, size_t end);

    /// Query by name with a full parameter tuple. In inc/fil modes the demand
    /// projection of args must be in U unless auto-demand is on.
    ValueVec ask(const std::string &query, const ValueVec &args);

    const OpCounters &counters() const { return counters_; }
    void reset_counters() {
        counters_ = OpCounters{};
        per_op_.clear();
        per_handler_.clear();
    }
    OpCounters snapshot_counters() const { return counters_; }

    /// Counters attributed per trace-op kind and per handler key.
    const std::map<std::string, OpCounters> &per_op_counters() const { return per_op_; }
    const std::map<std::string, OpCounters> &per_handler_counters() const { return per_handler_; }

    /// Total live size of all maintained stores (keys plus image sizes).
    size_t aux_space() const;
    /// Live size of the demand-dependent stores only: results, tag sets,
    /// filtered relations, and demand projections. Excludes the global
    /// inverse maps, which mirror the base relations.
    size_t demand_dependent_space() const;
    size_t store_live_size(const std::string &query, const std::string &store) const;
    std::string store_digest() const; // canonical dump of every store, for differential tests

    const Heap &heap() const { return heap_; }
    const std::unordered_map<std::string, Value> &env() const { return env_; }
    Mode mode() const { return opts_.mode; }

    /// From-scratch recomputation of result, tag, and filtered stores;
    /// throws std::logic_error on any mismatch.
    void check_all_invariants() const;

    std::string stats_json() const;

private:
    struct QueryState {
        CompiledQuery cq;
        std::vector<CountedMap> stores;
        std::vector<int> demand_positions; // demand params within params
    };

    void apply_update(const RelUpdate &upd, size_t op_index);
    void dispatch(QueryState &qs, const std::string &handler_key, const ValueVec &tuple);
    void exec_obj_block(QueryState &qs, const ObjBlock &b, const ValueVec &tuple);
    void exec_obj_list(QueryState &qs, const ObjBlock &b, const std::vector<ObjInstr> &instrs,
                       ValueVec &frame);
    void exec_maint_block(QueryState &qs, const MaintBlock &b, const ValueVec &tuple);
    void exec_maint_list(QueryState &qs, const std::vector<MaintInstr> &instrs,
                         std::unordered_map<std::string, Value> &env);

    Value trace_value(const ExprPtr &e, size_t op_index);
    Value trace_var(const std::string &name, size_t op_index);

    QueryState *state_for(const std::string &query);
    const QuerySpec *spec_for(const std::string &query) const;

    void demand_add(QueryState &qs, const ValueVec &tuple, size_t op_index);
    void demand_del(QueryState &qs, const ValueVec &tuple, size_t op_index);

    void tick_heap(uint64_t n = 1) { if (counting_) counters_.heap_reads += n; }
    void tick_lookup(uint64_t n = 1) { if (counting_) counters_.map_lookups += n; }
    void tick_iter(uint64_t n = 1) { if (counting_) counters_.map_iterations += n; }
    void tick_counted(uint64_t n = 1) { if (counting_) counters_.counted_ops += n; }
    void tick_guard(uint64_t n = 1) { if (counting_) counters_.guard_tests += n; }

    Script script_;
    RuntimeOptions opts_;
    Heap heap_;
    std::unordered_map<std::string, Value> env_;
    std::vector<QueryState> states_;
    OpCounters counters_;
    bool counting_ = true;
    std::map<std::string, OpCounters> per_op_;
    std::map<std::string, OpCounters> per_handler_;

    friend class InvariantChecker;
};

/// Stable name used to attribute counters per trace-op kind.
std::string trace_op_kind_name(const TraceOp &op);

} // namespace incq
