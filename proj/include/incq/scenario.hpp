#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "incq/ast.hpp"

namespace incq {

/// Follower/group scenario around the celebrity query. Proportions follow
/// the evaluation setup: 1% as many groups as users, each user follows 0.5%
/// of users, is in 5% of the groups, and sits at one of 20 locations, one of
/// which satisfies the query condition. Three demanded (celeb, group) pairs
/// share a single group.
struct CelebParams {
    int n_users = 500;
    double group_ratio = 0.01;
    double follower_ratio = 0.005;
    double membership_ratio = 0.05; // fraction of groups each user joins
    int groups_per_user = 0;        // when > 0, overrides membership_ratio
    int n_locations = 20;
    int demand_pairs = 3;
    int demand_users = 0; // when > 0, overrides demand_pairs (sweep / all-users setups)
    int pairs_of_ops = 200;
    bool updates_in_tag_set_only = false;
    uint64_t seed = 1;
};

Script gen_running_example(const CelebParams &p);

/// The three JQL benchmark queries over attends/students/courses.
struct JqlParams {
    int which = 2; // 1 | 2 | 3
    int collection_size = 1000;
    int n_courses = 10;
    int n_ops = 100;          // total operations
    double query_ratio = 0.5; // fraction of operations that are queries
    uint64_t seed = 1;
};

Script gen_jql_benchmark(const JqlParams &p);

/// Demand-set-size sweep: fixed data size, |U| swept as a fraction of users,
/// location updates restricted to tag-set members.
struct SweepPoint {
    double fraction;
    Script script;
};
std::vector<SweepPoint> gen_demand_size_sweep(const CelebParams &base,
                                              const std::vector<double> &fractions);

/// Random trace over the running example universe covering all nine update
/// kinds, including aliased sets and field reassignment. Asks target
/// currently-demanded pairs only.
struct RandomTraceParams {
    int n_users = 12;
    int n_groups = 4;
    int n_ops = 300;
    uint64_t seed = 1;
};

Script gen_random_trace(const RandomTraceParams &p);

/// Distinct fundamental update kinds occurring in the trace, as
/// "setadd"/"setdel"/"demand"/"undemand"/"assign.<field>" names.
std::vector<std::string> trace_update_kind_names(const Script &s);

} // namespace incq
