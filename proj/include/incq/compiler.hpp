#pragma once

#include <string>
#include <vector>

#include "incq/demand.hpp"
#include "incq/frontend.hpp"
#include "incq/objplan.hpp"
#include "incq/plan.hpp"

namespace incq {

enum class Mode { Orig, Inc, Fil, FilOsq };

Mode mode_from_string(const std::string &s);
std::string to_string(Mode m);

struct CompileOptions {
    Mode mode = Mode::Inc;
    Hints hints;
    bool no_count_elim = false;
};

struct CompiledQuery {
    QuerySpec spec;
    RelationalQuery rq;
    MaintenancePlan mplan;
    ObjPlan oplan;
};

/// The update kinds a script's trace can produce. Field deletions are assumed
/// for a field f only when some variable's f is assigned more than once
/// (trace variables alias an object only through rebinding, which this
/// over-approximates safely).
std::vector<UpdateKind> script_update_kinds(const Script &script);

/// Runs the three phases for every query in the script.
std::vector<CompiledQuery> compile_script(const Script &script, const CompileOptions &opts);

} // namespace incq
