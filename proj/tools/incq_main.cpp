#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "incq/bench.hpp"
#include "incq/compiler.hpp"
#include "incq/runtime.hpp"
#include "incq/scenario.hpp"

namespace {

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

incq::Script load_or_die(const std::string &path) {
    incq::LoadResult lr = incq::load_program(read_file(path));
    if (!lr.ok()) {
        std::cerr << lr.describe();
        std::exit(1);
    }
    return *lr.script;
}

incq::Hints load_hints(const std::string &path) {
    std::vector<std::string> errors;
    incq::Hints hints = incq::parse_hints(read_file(path), errors);
    for (const auto &e : errors) std::cerr << path << ": " << e << "\n";
    if (!errors.empty()) std::exit(1);
    return hints;
}

int cmd_compile(const std::string &file, const std::string &mode, const std::string &strategy,
                const std::string &hints_path, bool dump_relational, const std::string &dump_plan,
                const std::string &dump_objplan, bool no_count_elim) {
    incq::Script script = load_or_die(file);
    incq::CompileOptions opts;
    opts.mode = mode == "fil" ? (strategy == "osq" ? incq::Mode::FilOsq : incq::Mode::Fil)
                              : incq::Mode::Inc;
    if (!hints_path.empty()) opts.hints = load_hints(hints_path);
    opts.no_count_elim = no_count_elim;

    auto compiled = incq::compile_script(script, opts);
    if (dump_relational)
        for (const auto &cq : compiled)
            std::cout << "query " << cq.rq.name << ": r = " << cq.rq.to_string() << "\n";
    auto dump_all = [&compiled](const std::string &path, auto render) {
        std::string out = "[";
        for (size_t i = 0; i < compiled.size(); ++i) {
            if (i) out += ",\n";
            out += render(compiled[i]);
        }
        out += "]\n";
        if (path == "-")
            std::cout << out;
        else
            write_file(path, out);
    };
    if (!dump_plan.empty())
        dump_all(dump_plan, [](const incq::CompiledQuery &cq) { return plan_to_json(cq.mplan); });
    if (!dump_objplan.empty())
        dump_all(dump_objplan,
                 [](const incq::CompiledQuery &cq) { return objplan_to_json(cq.oplan); });
    std::cerr << "compiled " << compiled.size() << " quer" << (compiled.size() == 1 ? "y" : "ies")
              << " in mode " << to_string(opts.mode) << "\n";
    return 0;
}

int cmd_run(const std::string &file, const std::string &mode_str, bool auto_demand,
            const std::string &check_against, const std::string &stats_path, bool trace_log,
            bool copy_results, const std::string &hints_path, bool no_count_elim, bool wallclock) {
    incq::Script script = load_or_die(file);
    incq::Mode mode = incq::mode_from_string(mode_str);
    if (!check_against.empty() && check_against != "orig")
        throw std::runtime_error("--check-against supports only 'orig'");

    incq::CompileOptions copts;
    copts.mode = mode == incq::Mode::Orig ? incq::Mode::Inc : mode;
    copts.no_count_elim = no_count_elim;
    if (!hints_path.empty()) copts.hints = load_hints(hints_path);
    std::vector<incq::CompiledQuery> compiled;
    if (mode != incq::Mode::Orig) compiled = incq::compile_script(script, copts);

    incq::RuntimeOptions ropts;
    ropts.mode = mode;
    ropts.auto_demand = auto_demand;
    ropts.check_against_orig = check_against == "orig";
    ropts.copy_results = copy_results;
    ropts.ask_output = &std::cout;
    if (trace_log) ropts.trace_log = &std::cerr;

    incq::Runtime rt(script, std::move(compiled), ropts);
    auto t0 = std::chrono::steady_clock::now();
    try {
        rt.run_all();
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    auto t1 = std::chrono::steady_clock::now();
    if (wallclock)
        std::cerr << "wallclock_ms "
                  << std::chrono::duration<double, std::milli>(t1 - t0).count() << "\n";
    std::cerr << "ops " << rt.counters().total() << "\n";
    if (!stats_path.empty()) write_file(stats_path, rt.stats_json() + "\n");
    return 0;
}

int cmd_bench(const std::string &scenario, const std::vector<int> &sizes,
              const std::vector<uint64_t> &seeds, const std::string &out_path, int ops) {
    using namespace incq;
    std::vector<Measurement> rows;
    std::vector<Mode> modes{Mode::Orig, Mode::Inc, Mode::Fil};

    auto run_cell = [&](const Script &s, Mode m, int size, uint64_t seed) {
        rows.push_back(measure_script(s, m, scenario, size, seed));
    };

    for (int size : sizes) {
        for (uint64_t seed : seeds) {
            if (scenario == "celeb") {
                CelebParams p;
                p.n_users = size;
                // Desk-scale densities: the published proportions floor to
                // degenerate set sizes below a few thousand users.
                p.follower_ratio = 0.05;
                p.membership_ratio = 0.2;
                p.n_locations = 2;
                p.pairs_of_ops = ops;
                p.seed = seed;
                Script s = gen_running_example(p);
                for (Mode m : modes) run_cell(s, m, size, seed);
            } else if (scenario == "jql1" || scenario == "jql2" || scenario == "jql3") {
                JqlParams p;
                p.which = scenario[3] - '0';
                p.collection_size = size;
                p.n_ops = ops;
                p.seed = seed;
                Script s = gen_jql_benchmark(p);
                for (Mode m : modes) run_cell(s, m, size, seed);
            } else if (scenario == "demand-sweep") {
                CelebParams p;
                p.n_users = size;
                p.follower_ratio = 0.05;
                p.membership_ratio = 0.2;
                p.n_locations = 2;
                p.pairs_of_ops = ops;
                p.seed = seed;
                for (const auto &[frac, s] :
                     gen_demand_size_sweep(p, {0.0005, 0.01, 0.1, 0.5, 1.0})) {
                    for (Mode m : {Mode::Inc, Mode::Fil}) {
                        Measurement row = measure_script(s, m, scenario, size, seed);
                        row.scenario = "demand-sweep@" + std::to_string(frac);
                        rows.push_back(row);
                    }
                }
            } else if (scenario == "osq") {
                CelebParams p;
                p.n_users = size;
                p.follower_ratio = 0.05;
                p.membership_ratio = 0.2;
                p.n_locations = 2;
                p.groups_per_user = 5;
                p.demand_users = size;
                p.pairs_of_ops = ops;
                p.seed = seed;
                Script s = gen_running_example(p);
                for (Mode m : {Mode::Fil, Mode::FilOsq}) run_cell(s, m, size, seed);
            } else {
                std::cerr << "unknown scenario " << scenario << "\n";
                return 1;
            }
        }
    }

    std::string csv = measurements_to_csv(rows);
    if (out_path.empty() || out_path == "-")
        std::cout << csv;
    else
        write_file(out_path, csv);

    // Fitted growth exponent per mode and column (log-log least squares).
    std::map<std::string, std::map<std::string, std::vector<std::pair<double, double>>>> series;
    for (const auto &m : rows) {
        auto &s = series[m.scenario + "/" + m.mode];
        s["ask_ops"].push_back({double(m.size), double(m.ask_ops)});
        s["update_ops"].push_back({double(m.size), double(m.update_ops)});
        s["aux_space"].push_back({double(m.size), double(m.aux_space)});
    }
    for (const auto &[key, cols] : series)
        for (const auto &[col, pts] : cols)
            if (pts.size() > 1)
                std::cerr << "exponent " << key << " " << col << " = " << fit_exponent(pts)
                          << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"incq: demand-driven incremental object queries"};
    app.require_subcommand(1);

    // compile
    auto *compile = app.add_subcommand("compile", "compile a script and dump plans");
    std::string c_file, c_mode = "inc", c_strategy = "ours", c_hints, c_plan, c_objplan;
    bool c_rel = false, c_nce = false;
    compile->add_option("file", c_file, "input .oq script")->required();
    compile->add_option("--mode", c_mode)->check(CLI::IsMember({"inc", "fil"}));
    compile->add_option("--strategy", c_strategy)->check(CLI::IsMember({"ours", "osq"}));
    compile->add_option("--hints", c_hints, "cardinality hints file");
    compile->add_flag("--dump-relational", c_rel, "print lowered queries");
    compile->add_option("--dump-plan", c_plan, "write maintenance plan JSON (- for stdout)");
    compile->add_option("--dump-objplan", c_objplan, "write object plan JSON (- for stdout)");
    compile->add_flag("--no-count-elim", c_nce, "disable counting elimination");

    // run
    auto *run = app.add_subcommand("run", "execute a script");
    std::string r_file, r_mode = "orig", r_check, r_stats, r_hints;
    bool r_auto = false, r_tlog = false, r_copy = false, r_nce = false, r_wall = false;
    run->add_option("file", r_file, "input .oq script")->required();
    run->add_option("--mode", r_mode)->check(CLI::IsMember({"orig", "inc", "fil", "fil-osq"}));
    run->add_flag("--auto-demand", r_auto, "demand parameter values on first ask");
    run->add_option("--check-against", r_check, "oracle mode (only 'orig')");
    run->add_option("--stats", r_stats, "write counter stats JSON");
    run->add_flag("--trace-log", r_tlog, "log each executed handler block");
    run->add_flag("--copy-results", r_copy, "asks return (and pay for) a copy");
    run->add_option("--hints", r_hints, "cardinality hints file");
    run->add_flag("--no-count-elim", r_nce, "disable counting elimination");
    run->add_flag("--wallclock", r_wall, "report wall-clock time (informal)");

    // bench
    auto *bench = app.add_subcommand("bench", "run a measurement scenario");
    std::string b_scenario, b_out;
    std::vector<int> b_sizes{500, 1000, 2000};
    std::vector<uint64_t> b_seeds{1};
    int b_ops = 200;
    bench->add_option("scenario", b_scenario, "celeb|jql1|jql2|jql3|demand-sweep|osq")
        ->required();
    bench->add_option("--sizes", b_sizes)->delimiter(',');
    bench->add_option("--seeds", b_seeds)->delimiter(',');
    bench->add_option("--out", b_out, "CSV output path (- for stdout)");
    bench->add_option("--ops", b_ops, "measured operation pairs per run");

    CLI11_PARSE(app, argc, argv);

    try {
        if (compile->parsed())
            return cmd_compile(c_file, c_mode, c_strategy, c_hints, c_rel, c_plan, c_objplan,
                               c_nce);
        if (run->parsed())
            return cmd_run(r_file, r_mode, r_auto, r_check, r_stats, r_tlog, r_copy, r_hints,
                           r_nce, r_wall);
        if (bench->parsed()) return cmd_bench(b_scenario, b_sizes, b_seeds, b_out, b_ops);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
