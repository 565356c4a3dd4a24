#include "incq/bench.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace incq {

Measurement measure_script(const Script &script, Mode mode, const std::string &scenario,
                           int size, uint64_t seed) {
    CompileOptions copts;
    copts.mode = mode == Mode::Orig ? Mode::Inc : mode; // orig needs no plans
    std::vector<CompiledQuery> compiled =
        mode == Mode::Orig ? std::vector<CompiledQuery>{} : compile_script(script, copts);

    RuntimeOptions ropts;
    ropts.mode = mode;
    Runtime rt(script, std::move(compiled), ropts);

    auto t0 = std::chrono::steady_clock::now();
    rt.run_range(0, script.setup_len);
    rt.reset_counters();
    rt.run_range(script.setup_len, script.trace.size());
    auto t1 = std::chrono::steady_clock::now();

    Measurement m;
    m.scenario = scenario;
    m.mode = to_string(mode);
    m.size = size;
    m.seed = seed;
    for (const auto &[kind, c] : rt.per_op_counters()) {
        if (kind == "ask")
            m.ask_ops += c.total();
        else if (kind != "assert")
            m.update_ops += c.total();
    }
    m.aux_space = rt.aux_space();
    m.tag_user_size = rt.store_live_size("Q", "T_user");
    m.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return m;
}

double fit_exponent(const std::vector<std::pair<double, double>> &points) {
    // Slope of least-squares fit of log y on log x.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = static_cast<double>(points.size());
    for (const auto &[x, y] : points) {
        double lx = std::log(std::max(1.0, x));
        double ly = std::log(std::max(1.0, y));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0) return 0;
    return (n * sxy - sx * sy) / denom;
}

DifferentialReport run_differential(const Script &script, const std::vector<Mode> &modes,
                                    bool check_invariants) {
    DifferentialReport rep;
    rep.kinds_covered = trace_update_kind_names(script);
    for (Mode mode : modes) {
        CompileOptions copts;
        copts.mode = mode;
        RuntimeOptions ropts;
        ropts.mode = mode;
        ropts.check_against_orig = true;
        ropts.check_invariants = check_invariants;
        try {
            Runtime rt(script, compile_script(script, copts), ropts);
            rt.run_all();
        } catch (const std::exception &e) {
            rep.ok = false;
            rep.divergence = to_string(mode) + ": " + e.what();
            return rep;
        }
    }
    return rep;
}

std::string measurements_to_csv(const std::vector<Measurement> &rows) {
    std::ostringstream os;
    os << "scenario,mode,size,seed,ask_ops,update_ops,aux_space,tag_user_size,wall_ms\n";
    for (const auto &m : rows)
        os << m.scenario << "," << m.mode << "," << m.size << "," << m.seed << "," << m.ask_ops
           << "," << m.update_ops << "," << m.aux_space << "," << m.tag_user_size << ","
           << m.wall_ms << "\n";
    return os.str();
}

} // namespace incq
