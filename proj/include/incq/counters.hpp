#pragma once

#include <cstdint>

namespace incq {

/// Operation counters: the deterministic stand-in for wall-clock cost.
/// Every runtime primitive ticks exactly one category.
struct OpCounters {
    uint64_t heap_reads = 0;     // field reads, hasfield/isset, set membership tests
    uint64_t map_lookups = 0;    // keyed map/dom/U lookups and uncounted store writes
    uint64_t map_iterations = 0; // per element yielded by any iteration
    uint64_t counted_ops = 0;    // cadd/cdel on counted stores
    uint64_t guard_tests = 0;    // condition evaluations and inequality guards

    uint64_t total() const {
        return heap_reads + map_lookups + map_iterations + counted_ops + guard_tests;
    }

    OpCounters operator-(const OpCounters &o) const {
        OpCounters r;
        r.heap_reads = heap_reads - o.heap_reads;
        r.map_lookups = map_lookups - o.map_lookups;
        r.map_iterations = map_iterations - o.map_iterations;
        r.counted_ops = counted_ops - o.counted_ops;
        r.guard_tests = guard_tests - o.guard_tests;
        return r;
    }

    OpCounters &operator+=(const OpCounters &o) {
        heap_reads += o.heap_reads;
        map_lookups += o.map_lookups;
        map_iterations += o.map_iterations;
        counted_ops += o.counted_ops;
        guard_tests += o.guard_tests;
        return *this;
    }
};

} // namespace incq
