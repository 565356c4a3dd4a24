#include <doctest.h>

#include "incq/parser.hpp"
#include "incq/plan.hpp"

using namespace incq;

namespace {

RelationalQuery running_example() {
    auto pr = parse_program(
        "query Q(celeb,group) demand(celeb,group): "
        "{ user.email : user in celeb.followers, user in group, user.loc == \"NYC\" }");
    REQUIRE(pr.ok());
    return lower_query(pr.script->queries[0]);
}

std::vector<std::string> order_symbols(const AccessOrder &o) {
    std::vector<std::string> syms;
    for (const auto &s : o.steps) syms.push_back(s.cost.symbol);
    return syms;
}

std::string flatten(const std::vector<MaintInstr> &instrs, int depth = 0) {
    std::string out;
    for (const auto &i : instrs) {
        out += std::string(depth * 2, ' ') + i.head_string() + "\n";
        out += flatten(i.body, depth + 1);
    }
    return out;
}

} // namespace

TEST_CASE("query graph has one labeled edge per clause with occurrence suffixes") {
    RelationalQuery rq = running_example();
    QueryGraph g = build_query_graph(rq);
    CHECK(g.vertices.size() == 6);
    REQUIRE(g.edges.size() == 6);
    CHECK(g.edges[0].label.to_string() == "U");
    CHECK(g.edges[1].label.to_string() == "F_email");
    CHECK(g.edges[2].label.to_string() == "F_followers");
    CHECK(g.edges[3].label.to_string() == "M_1");
    CHECK(g.edges[4].label.to_string() == "M_2");
    CHECK(g.edges[5].label.to_string() == "F_loc");
}

TEST_CASE("single-clause query graph is one hyperedge") {
    auto pr = parse_program("query P(p) demand(p): { p : }");
    REQUIRE(pr.ok());
    QueryGraph g = build_query_graph(lower_query(pr.script->queries[0]));
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].is_hyper());
    CHECK(g.edges[0].vars == std::vector<std::string>{"p"});
}

TEST_CASE("step costs match the access patterns") {
    RelationalQuery rq = running_example();
    QueryGraph g = build_query_graph(rq);
    Hints none;

    // F_email with user bound is functional: unit.
    CostFactor f = cost_of_step(*g.find_edge(1), {"user"}, none);
    CHECK(f.rank == CostRank::Unit);

    // M_2 reverse with user bound: a relation image.
    f = cost_of_step(*g.find_edge(4), {"user"}, none);
    CHECK(f.rank == CostRank::RelImage);
    CHECK(f.symbol == "#img(M^-1){user}");

    // U with group bound: a demand image.
    f = cost_of_step(*g.find_edge(0), {"group"}, none);
    CHECK(f.rank == CostRank::DemandImage);
    CHECK(f.symbol == "#img(U.1){2=group}");

    // Nothing bound: full scans.
    f = cost_of_step(*g.find_edge(4), {}, none);
    CHECK(f.rank == CostRank::FullScan);
    f = cost_of_step(*g.find_edge(0), {}, none);
    CHECK(f.rank == CostRank::FullScan);

    // Fully bound: unit test.
    f = cost_of_step(*g.find_edge(4), {"group", "user"}, none);
    CHECK(f.rank == CostRank::Unit);
}

TEST_CASE("exactly the two orders of the F_loc update survive the heuristic") {
    RelationalQuery rq = running_example();
    QueryGraph g = build_query_graph(rq);
    Hints none;
    auto orders = enumerate_orders(g, 5, none); // trigger F_loc
    REQUIRE(orders.size() == 2);

    std::vector<std::vector<int>> ids;
    for (const auto &o : orders) {
        std::vector<int> seq;
        for (const auto &s : o.steps) seq.push_back(s.edge_id);
        ids.push_back(seq);
    }
    // Order 2: email, M_1, F_followers reverse, U, M_2 test.
    CHECK(ids[0] == std::vector<int>{1, 3, 2, 0, 4});
    CHECK(order_symbols(orders[0]) ==
          std::vector<std::string>{"1", "#img(M^-1){user}",
                                   "#img(F_followers^-1){celeb__followers__2}",
                                   "#img(U.2){1=celeb}", "1"});
    // Order 1: email, M_2, U, F_followers, M_1 test.
    CHECK(ids[1] == std::vector<int>{1, 4, 0, 2, 3});
    CHECK(order_symbols(orders[1]) ==
          std::vector<std::string>{"1", "#img(M^-1){user}", "#img(U.1){2=group}", "1", "1"});

    // Without hints the first order of the table wins.
    AccessOrder best = search_access_order(g, 5, none);
    std::vector<int> best_ids;
    for (const auto &s : best.steps) best_ids.push_back(s.edge_id);
    CHECK(best_ids == std::vector<int>{1, 4, 0, 2, 3});

    // One celeb per followers set and one group per celeb: order 2 wins.
    std::vector<std::string> errs;
    Hints hints = parse_hints("F_followers.1/2 = 1\nU.2/1 = 1\n", errs);
    REQUIRE(errs.empty());
    best = search_access_order(g, 5, hints);
    best_ids.clear();
    for (const auto &s : best.steps) best_ids.push_back(s.edge_id);
    CHECK(best_ids == std::vector<int>{1, 3, 2, 0, 4});
}

TEST_CASE("a demand addition recomputes from scratch") {
    RelationalQuery rq = running_example();
    QueryGraph g = build_query_graph(rq);
    Hints none;
    AccessOrder o = search_access_order(g, 0, none); // trigger U
    // No step may touch U again, and every cost factor is a forward access.
    for (const auto &s : o.steps) {
        CHECK(s.edge_id != 0);
        CHECK(s.cost.symbol.find("^-1") == std::string::npos);
    }
}

TEST_CASE("generated maintenance for the field-update handler") {
    RelationalQuery rq = running_example();
    MaintenancePlan plan = plan_incremental(rq, {});

    const Handler &h = plan.handlers.at("F_loc:+");
    REQUIRE(h.blocks.size() == 1);
    std::string code = flatten(h.blocks[0].instrs);
    CHECK(code ==
          "if user__loc__3 == \"NYC\"\n"
          "  for (user__email__1) in img(F_email){user}\n"
          "    for (group) in img(M^-1){user}\n"
          "      for (celeb) in img(U.1){2=group}\n"
          "        for (celeb__followers__2) in img(F_followers){celeb}\n"
          "          if (celeb__followers__2,user) in M_1\n"
          "            r add (celeb,group, user__email__1)\n");

    // Deletion is symmetric, ending in r del.
    const Handler &hd = plan.handlers.at("F_loc:-");
    std::string del_code = flatten(hd.blocks[0].instrs);
    CHECK(del_code.find("r del (celeb,group, user__email__1)") != std::string::npos);
    CHECK(del_code.substr(0, del_code.find("r del")) == code.substr(0, code.find("r add")));
}

TEST_CASE("inverse maps are maintained only when some handler uses them") {
    RelationalQuery rq = running_example();
    MaintenancePlan plan = plan_incremental(rq, {});
    std::vector<std::string> names;
    for (const auto &a : plan.aux) names.push_back(a.store_name());
    CHECK(std::find(names.begin(), names.end(), "M^-1") != names.end());
    CHECK(std::find(names.begin(), names.end(), "F_followers^-1") != names.end());
    CHECK(std::find(names.begin(), names.end(), "F_loc^-1") == names.end());
    CHECK(std::find(names.begin(), names.end(), "F_email^-1") == names.end());

    // M^-1 updates ride along with both member update kinds.
    for (const char *key : {"M:+", "M:-"}) {
        bool found = false;
        for (const auto &b : plan.handlers.at(key).blocks)
            if (b.id.find("M^-1") != std::string::npos) found = true;
        CHECK(found);
    }
}

TEST_CASE("self-join handlers carry exclusion guards on later occurrences") {
    RelationalQuery rq = running_example();
    MaintenancePlan plan = plan_incremental(rq, {});
    const Handler &h = plan.handlers.at("M:+");
    std::string all;
    for (const auto &b : h.blocks) all += b.id + ":\n" + flatten(b.instrs);
    CHECK(all.find("if (celeb__followers__2,user) != (group,user)") != std::string::npos);

    // A single-occurrence relation gets no guard.
    std::string floc = flatten(plan.handlers.at("F_loc:+").blocks[0].instrs);
    CHECK(floc.find("!=") == std::string::npos);
}

TEST_CASE("plans are deterministic") {
    RelationalQuery rq = running_example();
    CHECK(plan_to_json(plan_incremental(rq, {})) == plan_to_json(plan_incremental(rq, {})));
}
