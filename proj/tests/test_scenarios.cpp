#include <doctest.h>

#include <algorithm>

#include "incq/bench.hpp"
#include "incq/scenario.hpp"

using namespace incq;

TEST_CASE("scenario generation is a pure function of parameters and seed") {
    CelebParams p;
    p.n_users = 60;
    p.pairs_of_ops = 10;
    p.seed = 42;
    CHECK(script_to_string(gen_running_example(p)) == script_to_string(gen_running_example(p)));
    p.seed = 43;
    CHECK(script_to_string(gen_running_example(p)) != script_to_string(gen_running_example(CelebParams{})));

    JqlParams j;
    j.collection_size = 30;
    j.n_ops = 10;
    CHECK(script_to_string(gen_jql_benchmark(j)) == script_to_string(gen_jql_benchmark(j)));
}

TEST_CASE("random traces cover all nine fundamental update kinds") {
    RandomTraceParams p;
    p.n_ops = 400;
    Script s = gen_random_trace(p);
    auto kinds = trace_update_kind_names(s);
    // Two demand kinds, set add/del (hitting both membership clauses through
    // shared sets), and the three field assignments.
    for (const char *k : {"demand", "undemand", "setadd", "setdel", "assign.loc",
                          "assign.email", "assign.followers"})
        CHECK(std::find(kinds.begin(), kinds.end(), k) != kinds.end());
    CHECK(kinds.size() == 7);
}

TEST_CASE("jql benchmarks stay oracle-equal under churn") {
    for (int which : {1, 2, 3}) {
        JqlParams p;
        p.which = which;
        p.collection_size = 40;
        p.n_ops = 60;
        p.seed = 5;
        Script s = gen_jql_benchmark(p);
        auto rep = run_differential(s, {Mode::Inc, Mode::Fil}, false);
        CAPTURE(which);
        CAPTURE(rep.divergence);
        CHECK(rep.ok);
    }
}

TEST_CASE("celeb scenario stays oracle-equal") {
    CelebParams p;
    p.n_users = 80;
    p.pairs_of_ops = 30;
    Script s = gen_running_example(p);
    auto rep = run_differential(s, {Mode::Inc, Mode::Fil, Mode::FilOsq}, false);
    CAPTURE(rep.divergence);
    CHECK(rep.ok);
}

TEST_CASE("demand sweep scripts scale the demand set and direct updates at it") {
    CelebParams base;
    base.n_users = 100;
    base.pairs_of_ops = 5;
    auto points = gen_demand_size_sweep(base, {0.01, 0.5});
    REQUIRE(points.size() == 2);
    size_t demands_small = 0, demands_large = 0;
    for (const auto &op : points[0].script.trace)
        if (op.kind == TraceOp::Kind::DemandAdd) ++demands_small;
    for (const auto &op : points[1].script.trace)
        if (op.kind == TraceOp::Kind::DemandAdd) ++demands_large;
    CHECK(demands_small == 1);
    CHECK(demands_large == 50);
}

TEST_CASE("exponent fitting recovers polynomial growth") {
    std::vector<std::pair<double, double>> lin, quad, flat;
    for (double n : {500.0, 1000.0, 2000.0, 4000.0}) {
        lin.push_back({n, 3 * n});
        quad.push_back({n, 0.01 * n * n});
        flat.push_back({n, 42.0});
    }
    CHECK(fit_exponent(lin) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(fit_exponent(quad) == doctest::Approx(2.0).epsilon(0.01));
    CHECK(fit_exponent(flat) == doctest::Approx(0.0).epsilon(0.01));
}

TEST_CASE("measurement attributes counters to asks and updates") {
    CelebParams p;
    p.n_users = 60;
    p.pairs_of_ops = 8;
    Script s = gen_running_example(p);
    Measurement orig = measure_script(s, Mode::Orig, "celeb", 60, 1);
    Measurement inc = measure_script(s, Mode::Inc, "celeb", 60, 1);
    CHECK(orig.ask_ops > 0);
    CHECK(orig.update_ops > 0);
    CHECK(inc.ask_ops > 0);
    CHECK(inc.aux_space > 0);
    CHECK(orig.aux_space == 0);
}
