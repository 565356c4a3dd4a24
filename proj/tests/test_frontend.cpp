#include <doctest.h>

#include "incq/frontend.hpp"
#include "incq/parser.hpp"

using namespace incq;

namespace {
const char *kRunning =
    "query Q(c,g) demand(c,g): { u.email : u in c.followers, u in g, u.loc == \"NYC\" }";
}

TEST_CASE("parse the running example query") {
    auto pr = parse_program(kRunning);
    REQUIRE(pr.ok());
    REQUIRE(pr.script->queries.size() == 1);
    const QuerySpec &q = pr.script->queries[0];
    CHECK(q.params == std::vector<std::string>{"c", "g"});
    CHECK(q.demand_params == std::vector<std::string>{"c", "g"});
    CHECK(q.clauses.size() == 3);
    CHECK(q.clauses[0].kind == Clause::Kind::Membership);
    CHECK(q.clauses[0].selector.to_string() == "c.followers");
    CHECK(q.clauses[2].kind == Clause::Kind::Condition);
    CHECK(pr.script->trace.empty());
}

TEST_CASE("field assignment with a selector chain on the right") {
    auto pr = parse_program("new x\nnew y\nx.f = y.g.h");
    REQUIRE(pr.ok());
    const TraceOp &op = pr.script->trace[2];
    CHECK(op.kind == TraceOp::Kind::FieldAssign);
    CHECK(op.var == "x");
    CHECK(op.field == "f");
    CHECK(expr_to_string(op.value) == "y.g.h");
}

TEST_CASE("syntax errors carry positions and parsing is total") {
    auto pr = parse_program("query Q(: {x : }\nnew ok");
    CHECK(!pr.ok());
    REQUIRE(!pr.errors.empty());
    CHECK(pr.errors[0].pos.line == 1);
}

TEST_CASE("pretty-print round trip is a fixed point") {
    const char *src =
        "query Q(c,g) demand(c,g): { u.email : u in c.followers, u in g, u.loc == \"NYC\" }\n"
        "new u1\nnewset s1\nu1.loc = \"NYC\"\nadd s1 u1\ndemand Q (u1, s1)\nask Q (u1, s1)\n"
        "assert Q (u1, s1) == { \"a\", (1, 2) }\n";
    auto p1 = parse_program(src);
    REQUIRE(p1.ok());
    std::string printed = script_to_string(*p1.script);
    auto p2 = parse_program(printed);
    REQUIRE(p2.ok());
    CHECK(script_to_string(*p2.script) == printed);
}

TEST_CASE("reachability accepts the running example") {
    auto pr = parse_program(kRunning);
    REQUIRE(pr.ok());
    CHECK(check_well_formed(pr.script->queries[0]).empty());
}

TEST_CASE("russell-style query is rejected unless x is a parameter") {
    auto pr = parse_program("query R(): { x : not x in x }");
    REQUIRE(pr.ok());
    CHECK(check_well_formed(pr.script->queries[0]) == std::vector<std::string>{"x"});

    auto pr2 = parse_program("query R(x): { x : not x in x }");
    REQUIRE(pr2.ok());
    CHECK(check_well_formed(pr2.script->queries[0]).empty());
}

TEST_CASE("parameter-only query with zero clauses is well-formed") {
    auto pr = parse_program("query P(p): { p : }");
    REQUIRE(pr.ok());
    CHECK(check_well_formed(pr.script->queries[0]).empty());
}

TEST_CASE("reachability is monotone under added membership clauses") {
    auto base = parse_program("query Q(s): { x : y in s }");
    auto more = parse_program("query Q(s): { x : y in s, x in y }");
    REQUIRE(base.ok());
    REQUIRE(more.ok());
    auto u1 = check_well_formed(base.script->queries[0]);
    auto u2 = check_well_formed(more.script->queries[0]);
    // Every variable unreachable after adding a clause was unreachable before.
    for (const auto &v : u2)
        CHECK(std::find(u1.begin(), u1.end(), v) != u1.end());
    CHECK(u1 == std::vector<std::string>{"x"});
    CHECK(u2.empty());
}

TEST_CASE("demand parameters must keep the query well-formed") {
    auto ok = parse_program(kRunning);
    REQUIRE(ok.ok());
    CHECK(validate_demand_params(ok.script->queries[0]).ok);

    // With `c in g` added, g alone suffices.
    auto pr = parse_program(
        "query Q(c,g) demand(g): { u.email : u in c.followers, u in g, c in g }");
    REQUIRE(pr.ok());
    CHECK(validate_demand_params(pr.script->queries[0]).ok);

    // Without it, demand(g) leaves c (and everything reached through c) unreachable.
    auto bad = parse_program(
        "query Q(c,g) demand(g): { u.email : u in c.followers, u in g, u.loc == \"NYC\" }");
    REQUIRE(bad.ok());
    auto dc = validate_demand_params(bad.script->queries[0]);
    CHECK(!dc.ok);
    CHECK(std::find(dc.unreachable.begin(), dc.unreachable.end(), "c") != dc.unreachable.end());

    auto lr = load_program(
        "query Q(c,g) demand(g): { u.email : u in c.followers, u in g, u.loc == \"NYC\" }");
    CHECK(!lr.ok());
}

TEST_CASE("trace validation catches unbound variables and arity mismatches") {
    auto unbound = load_program("add s1 u1");
    CHECK(!unbound.ok());
    auto arity = load_program(std::string(kRunning) + "\nnew a\ndemand Q (a)");
    CHECK(!arity.ok());
}

TEST_CASE("omitted demand clause defaults to all parameters") {
    auto pr = parse_program("query Q(c,g): { u : u in c, u in g }");
    REQUIRE(pr.ok());
    CHECK(!pr.script->queries[0].demand_explicit);
    CHECK(pr.script->queries[0].demand_params == pr.script->queries[0].params);
}
