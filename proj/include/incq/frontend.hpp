#pragma once

#include <string>
#include <vector>

#include "incq/ast.hpp"
#include "incq/parser.hpp"

namespace incq {

/// Least-fixed-point reachability: a variable is reachable iff it is a
/// parameter or the left side of a membership clause whose selector root is
/// reachable. Returns the variables NOT in the fixed point, in
/// first-occurrence order (parameters first, then clause order, then result).
std::vector<std::string> unreachable_vars(const QuerySpec &q,
                                          const std::vector<std::string> &params);

/// ok == empty result. Diagnostic, not an error.
inline std::vector<std::string> check_well_formed(const QuerySpec &q) {
    return unreachable_vars(q, q.params);
}

struct DemandCheck {
    bool ok = true;
    std::vector<std::string> unreachable; // InsufficientDemandParams listing
};

/// Re-runs reachability with params := demand_params. When the script omitted
/// a demand clause, demand_params already defaults to all parameters.
DemandCheck validate_demand_params(const QuerySpec &q);

/// All variables occurring in the query, first-occurrence order.
std::vector<std::string> query_vars(const QuerySpec &q);

struct FrontendError {
    SourcePos pos;
    std::string message;
};

/// Parses + validates: well-formedness, demand parameters, trace variable
/// binding, and demand/ask arities. Ask carries the full parameter tuple;
/// demand add/del carry demand-parameter tuples.
struct LoadResult {
    std::optional<Script> script;
    std::vector<SyntaxError> syntax_errors;
    std::vector<FrontendError> errors;

    bool ok() const { return script.has_value() && syntax_errors.empty() && errors.empty(); }
    std::string describe() const;
};

LoadResult load_program(const std::string &source);
LoadResult validate_script(Script script);

} // namespace incq
