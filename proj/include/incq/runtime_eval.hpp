#pragma once

#include <functional>
#include <map>
#include <optional>
#include <unordered_map>

#include "incq/ast.hpp"
#include "incq/counters.hpp"
#include "incq/heap.hpp"
#include "incq/relational.hpp"

namespace incq {

using VarLookup = std::function<const Value *(const std::string &)>;

/// Pure expression evaluation with skip semantics: a missing field, a
/// non-set membership target, or incompatible operands yield nullopt.
/// Counters (when given) tick one heap read per field hop or membership test.
std::optional<Value> eval_expr(const ExprPtr &e, const VarLookup &vars, const Heap &heap,
                               OpCounters *counters);

/// Straightforward evaluation of an object query: nested iteration over the
/// membership clauses in reachability order, testing conditions as soon as
/// their variables are bound. Error bindings are skipped. The result is
/// duplicate-free and sorted.
ValueVec eval_naive(const QuerySpec &q, const ValueVec &args, const Heap &heap,
                    OpCounters *counters);

/// Demand set abstraction for relational evaluation: the tuples currently in U.
using DemandTuples = std::vector<ValueVec>;

/// Straightforward evaluation of a lowered relational query over the virtual
/// F_f / M relations induced by the heap and the given demand set. When
/// `args` is supplied the parameters start bound.
ValueVec eval_naive_relational(const RelationalQuery &rq, const std::optional<ValueVec> &args,
                               const Heap &heap, const DemandTuples &demand, OpCounters *counters);

/// Brute-force derivation counting for the result invariant: enumerates every
/// clause binding and tallies (param-tuple, result-value) pairs.
std::map<std::pair<Value, Value>, int64_t>
count_derivations(const RelationalQuery &rq, const Heap &heap, const DemandTuples &demand);

/// Phase 1 on updates: decomposes a heap update into relational updates with
/// membership guards. A field overwrite yields a deletion of the old pair
/// followed by the addition (only the addition when the field was unset);
/// redundant set additions/deletions yield nothing. Demand ops are guarded
/// against the given demand tuples.
std::vector<RelUpdate> lower_update(const TraceOp &op,
                                    const std::unordered_map<std::string, Value> &env,
                                    const Heap &heap, const DemandTuples &demand);

} // namespace incq
