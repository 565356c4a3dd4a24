#pragma once

#include <optional>
#include <string>
#include <vector>

#include "incq/compiler.hpp"
#include "incq/runtime.hpp"
#include "incq/scenario.hpp"

namespace incq {

struct Measurement {
    std::string scenario;
    std::string mode;
    int size = 0;
    uint64_t seed = 0;
    uint64_t ask_ops = 0;    // counter total attributed to asks (post-setup)
    uint64_t update_ops = 0; // counter total attributed to updates (post-setup)
    size_t aux_space = 0;    // live store sizes at the end of the run
    size_t tag_user_size = 0;
    double wall_ms = 0;
};

/// Runs a script in one mode, attributing post-setup counters to ask or
/// update operations.
Measurement measure_script(const Script &script, Mode mode, const std::string &scenario,
                           int size, uint64_t seed);

/// Least-squares slope of log(value) against log(size); the growth exponent.
double fit_exponent(const std::vector<std::pair<double, double>> &points);

struct DifferentialReport {
    bool ok = true;
    std::string divergence; // first divergence with trace position
    std::vector<std::string> kinds_covered;
};

/// Executes the script in every requested mode with the naive oracle checked
/// at each ask (and optionally full invariant checks at each op).
DifferentialReport run_differential(const Script &script, const std::vector<Mode> &modes,
                                    bool check_invariants);

std::string measurements_to_csv(const std::vector<Measurement> &rows);

} // namespace incq
