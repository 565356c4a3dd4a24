#include "incq/scenario.hpp"

#include <algorithm>
#include <cassert>
#include <random>
#include <set>

#include "incq/parser.hpp"

namespace incq {

namespace {

/// Trace construction helper; variable names double as stable object ids.
struct TraceBuilder {
    Script script;

    void new_object(const std::string &v) { script.trace.push_back(make(TraceOp::Kind::NewObject, v)); }
    void new_set(const std::string &v) { script.trace.push_back(make(TraceOp::Kind::NewSet, v)); }

    void assign(const std::string &v, const std::string &field, ExprPtr value) {
        TraceOp op = make(TraceOp::Kind::FieldAssign, v);
        op.field = field;
        op.value = std::move(value);
        script.trace.push_back(std::move(op));
    }

    void set_add(const std::string &set, const std::string &elem) {
        TraceOp op = make(TraceOp::Kind::SetAdd, set);
        op.value = Expr::var(elem);
        script.trace.push_back(std::move(op));
    }

    void set_add_value(const std::string &set, ExprPtr value) {
        TraceOp op = make(TraceOp::Kind::SetAdd, set);
        op.value = std::move(value);
        script.trace.push_back(std::move(op));
    }

    void set_del(const std::string &set, const std::string &elem) {
        TraceOp op = make(TraceOp::Kind::SetDel, set);
        op.value = Expr::var(elem);
        script.trace.push_back(std::move(op));
    }

    void set_del_value(const std::string &set, ExprPtr value) {
        TraceOp op = make(TraceOp::Kind::SetDel, set);
        op.value = std::move(value);
        script.trace.push_back(std::move(op));
    }

    void query_op(TraceOp::Kind kind, const std::string &q, std::vector<ExprPtr> args) {
        TraceOp op;
        op.kind = kind;
        op.query = q;
        op.args = std::move(args);
        script.trace.push_back(std::move(op));
    }

    void mark_setup_done() { script.setup_len = script.trace.size(); }

private:
    static TraceOp make(TraceOp::Kind kind, const std::string &v) {
        TraceOp op;
        op.kind = kind;
        op.var = v;
        return op;
    }
};

QuerySpec celeb_query() {
    const char *src =
        "query Q(celeb, group) demand(celeb, group): "
        "{ user.email : user in celeb.followers, user in group, user.loc == \"L0\" }";
    auto pr = parse_program(src);
    assert(pr.ok());
    return pr.script->queries[0];
}

int at_least_one(double x) { return std::max(1, static_cast<int>(x)); }

/// Distinct sample of k values in [0, n).
std::vector<int> sample_distinct(std::mt19937_64 &rng, int n, int k) {
    k = std::min(k, n);
    std::set<int> got;
    std::vector<int> out;
    while (static_cast<int>(out.size()) < k) {
        int v = static_cast<int>(rng() % static_cast<uint64_t>(n));
        if (got.insert(v).second) out.push_back(v);
    }
    return out;
}

} // namespace

Script gen_running_example(const CelebParams &p) {
    std::mt19937_64 rng(p.seed);
    TraceBuilder tb;
    tb.script.queries.push_back(celeb_query());

    int n = p.n_users;
    int n_groups = at_least_one(n * p.group_ratio);
    int follows = at_least_one(n * p.follower_ratio);
    int memberships = p.groups_per_user > 0 ? std::min(p.groups_per_user, n_groups)
                                            : at_least_one(n_groups * p.membership_ratio);

    auto user = [](int i) { return "u" + std::to_string(i); };
    auto fset = [](int i) { return "f" + std::to_string(i); };
    auto group = [](int i) { return "g" + std::to_string(i); };
    auto loc = [&](int i) { return Expr::str_lit("L" + std::to_string(i % p.n_locations)); };

    for (int i = 0; i < n; ++i) {
        tb.new_object(user(i));
        tb.new_set(fset(i));
        tb.assign(user(i), "followers", Expr::var(fset(i)));
        tb.assign(user(i), "email", Expr::str_lit("e" + std::to_string(i)));
        tb.assign(user(i), "loc", loc(static_cast<int>(rng() % p.n_locations)));
    }
    for (int i = 0; i < n_groups; ++i) tb.new_set(group(i));

    std::vector<std::set<int>> group_members(n_groups);
    std::vector<std::set<int>> follower_of(n); // follower_of[v] = users in v's followers set
    for (int i = 0; i < n; ++i) {
        for (int gidx : sample_distinct(rng, n_groups, memberships)) {
            tb.set_add(group(gidx), user(i));
            group_members[gidx].insert(i);
        }
        for (int v : sample_distinct(rng, n, follows)) {
            tb.set_add(fset(v), user(i));
            follower_of[v].insert(i);
        }
    }

    // Demanded pairs share the single group g0.
    int demanded = p.demand_users > 0 ? std::min(p.demand_users, n) : p.demand_pairs;
    std::vector<int> celebs;
    for (int i = 0; i < demanded; ++i) celebs.push_back(i);
    for (int c : celebs)
        tb.query_op(TraceOp::Kind::DemandAdd, "Q", {Expr::var(user(c)), Expr::var(group(0))});
    tb.mark_setup_done();

    // Update targets: all users, or only those the demanded pairs reach.
    std::vector<int> targets;
    if (p.updates_in_tag_set_only) {
        for (int m : group_members[0]) {
            bool followed = false;
            for (int c : celebs)
                if (follower_of[c].count(m)) followed = true;
            if (followed) targets.push_back(m);
        }
        if (targets.empty())
            targets.assign(group_members[0].begin(), group_members[0].end());
    }
    if (targets.empty())
        for (int i = 0; i < n; ++i) targets.push_back(i);

    for (int k = 0; k < p.pairs_of_ops; ++k) {
        int c = celebs[rng() % celebs.size()];
        tb.query_op(TraceOp::Kind::Ask, "Q", {Expr::var(user(c)), Expr::var(group(0))});
        int t = targets[rng() % targets.size()];
        tb.assign(user(t), "loc", loc(static_cast<int>(rng() % p.n_locations)));
    }
    return std::move(tb.script);
}

namespace {

QuerySpec jql_query(int which) {
    std::string src;
    switch (which) {
        case 1:
            src = "query Q(attends) demand(attends): "
                  "{ a : a in attends, a.course == \"COMP101\" }";
            break;
        case 2:
            src = "query Q(attends, students) demand(attends, students): "
                  "{ (a, s) : a in attends, s in students, a.course == \"COMP101\", "
                  "a.student == s }";
            break;
        default:
            src = "query Q(attends, students, courses) demand(attends, students, courses): "
                  "{ (a, s, c) : a in attends, s in students, c in courses, "
                  "a.course == \"COMP101\", a.student == s, a.course == c }";
            break;
    }
    auto pr = parse_program(src);
    assert(pr.ok());
    return pr.script->queries[0];
}

} // namespace

Script gen_jql_benchmark(const JqlParams &p) {
    std::mt19937_64 rng(p.seed);
    TraceBuilder tb;
    tb.script.queries.push_back(jql_query(p.which));

    int n = p.collection_size;
    auto student = [](int i) { return "s" + std::to_string(i); };
    auto attend = [](int i) { return "a" + std::to_string(i); };
    auto course_name = [&](int i) {
        return i % p.n_courses == 0 ? std::string("COMP101") : "C" + std::to_string(i % p.n_courses);
    };

    tb.new_set("attends");
    tb.new_set("students");
    tb.new_set("courses");
    for (int i = 0; i < p.n_courses; ++i)
        tb.set_add_value("courses", Expr::str_lit(course_name(i)));
    for (int i = 0; i < n; ++i) {
        tb.new_object(student(i));
        tb.set_add("students", student(i));
    }
    int next_attend = 0;
    std::vector<std::string> live;
    auto add_attend = [&]() {
        std::string a = attend(next_attend++);
        tb.new_object(a);
        tb.assign(a, "course", Expr::str_lit(course_name(static_cast<int>(rng() % p.n_courses))));
        tb.assign(a, "student", Expr::var(student(static_cast<int>(rng() % n))));
        tb.set_add("attends", a);
        live.push_back(a);
    };
    for (int i = 0; i < n; ++i) add_attend();

    std::vector<ExprPtr> args{Expr::var("attends")};
    if (p.which >= 2) args.push_back(Expr::var("students"));
    if (p.which >= 3) args.push_back(Expr::var("courses"));
    tb.query_op(TraceOp::Kind::DemandAdd, "Q", args);
    tb.mark_setup_done();

    for (int k = 0; k < p.n_ops; ++k) {
        bool is_query = (rng() % 1000) < static_cast<uint64_t>(p.query_ratio * 1000);
        if (is_query && !live.empty()) {
            tb.query_op(TraceOp::Kind::Ask, "Q", args);
        } else {
            size_t victim = rng() % live.size();
            tb.set_del("attends", live[victim]);
            live.erase(live.begin() + static_cast<long>(victim));
            add_attend();
        }
    }
    return std::move(tb.script);
}

std::vector<SweepPoint> gen_demand_size_sweep(const CelebParams &base,
                                              const std::vector<double> &fractions) {
    std::vector<SweepPoint> out;
    for (double f : fractions) {
        CelebParams p = base;
        p.demand_users = std::max(1, static_cast<int>(base.n_users * f));
        p.updates_in_tag_set_only = true;
        out.push_back({f, gen_running_example(p)});
    }
    return out;
}

Script gen_random_trace(const RandomTraceParams &p) {
    std::mt19937_64 rng(p.seed);
    TraceBuilder tb;
    tb.script.queries.push_back(celeb_query());

    auto user = [](int i) { return "u" + std::to_string(i); };
    auto fset = [](int i) { return "f" + std::to_string(i); };
    auto group = [](int i) { return "g" + std::to_string(i); };
    auto loc = [&](int i) { return Expr::str_lit("L" + std::to_string(i % 3)); };

    for (int i = 0; i < p.n_users; ++i) {
        tb.new_object(user(i));
        tb.new_set(fset(i));
        tb.assign(user(i), "followers", Expr::var(fset(i)));
        tb.assign(user(i), "email", Expr::str_lit("e" + std::to_string(i % 5)));
        tb.assign(user(i), "loc", loc(static_cast<int>(rng() % 3)));
    }
    for (int i = 0; i < p.n_groups; ++i) tb.new_set(group(i));

    // One group doubles as a followers set: the aliasing scenario.
    tb.assign(user(0), "followers", Expr::var(group(0)));

    // All set variables that may be asked about or updated as groups or
    // follower sets; aliasing mixes the two roles freely.
    std::vector<std::string> sets;
    for (int i = 0; i < p.n_users; ++i) sets.push_back(fset(i));
    for (int i = 0; i < p.n_groups; ++i) sets.push_back(group(i));

    std::vector<std::pair<std::string, std::string>> demanded; // (user, set)
    auto demand_pair = [&]() {
        std::string c = user(rng() % p.n_users);
        std::string g = sets[rng() % sets.size()];
        tb.query_op(TraceOp::Kind::DemandAdd, "Q", {Expr::var(c), Expr::var(g)});
        std::pair<std::string, std::string> pair{c, g};
        if (std::find(demanded.begin(), demanded.end(), pair) == demanded.end())
            demanded.push_back(std::move(pair));
    };
    demand_pair();
    demand_pair();

    for (int k = 0; k < p.n_ops; ++k) {
        switch (rng() % 12) {
            case 0: // demand add
                demand_pair();
                break;
            case 1: { // demand del (possibly of a non-member: guarded)
                if (demanded.empty()) break;
                size_t i = rng() % demanded.size();
                tb.query_op(TraceOp::Kind::DemandDel, "Q",
                            {Expr::var(demanded[i].first), Expr::var(demanded[i].second)});
                demanded.erase(demanded.begin() + static_cast<long>(i));
                break;
            }
            case 2: // reassign a location
            case 3:
                tb.assign(user(rng() % p.n_users), "loc", loc(static_cast<int>(rng() % 3)));
                break;
            case 4: // reassign an email (duplicates on purpose: counted results matter)
                tb.assign(user(rng() % p.n_users), "email",
                          Expr::str_lit("e" + std::to_string(rng() % 5)));
                break;
            case 5: // repoint a followers field at some other set (aliasing)
                tb.assign(user(rng() % p.n_users), "followers",
                          Expr::var(sets[rng() % sets.size()]));
                break;
            case 6: // ask a demanded pair
            case 7: {
                if (demanded.empty()) break;
                size_t i = rng() % demanded.size();
                tb.query_op(TraceOp::Kind::Ask, "Q",
                            {Expr::var(demanded[i].first), Expr::var(demanded[i].second)});
                break;
            }
            default: { // set add/del on any set
                const std::string &s = sets[rng() % sets.size()];
                const std::string &u = user(rng() % p.n_users);
                if (rng() % 2)
                    tb.set_add(s, u);
                else
                    tb.set_del(s, u);
                break;
            }
        }
    }
    // Make sure every demanded pair is asked at least once at the end.
    for (const auto &[c, g] : demanded)
        tb.query_op(TraceOp::Kind::Ask, "Q", {Expr::var(c), Expr::var(g)});
    return std::move(tb.script);
}

std::vector<std::string> trace_update_kind_names(const Script &s) {
    std::vector<std::string> names;
    auto push = [&names](const std::string &n) {
        if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
    };
    for (const auto &op : s.trace) {
        switch (op.kind) {
            case TraceOp::Kind::FieldAssign: push("assign." + op.field); break;
            case TraceOp::Kind::SetAdd: push("setadd"); break;
            case TraceOp::Kind::SetDel: push("setdel"); break;
            case TraceOp::Kind::DemandAdd: push("demand"); break;
            case TraceOp::Kind::DemandDel: push("undemand"); break;
            default: break;
        }
    }
    return names;
}

} // namespace incq
