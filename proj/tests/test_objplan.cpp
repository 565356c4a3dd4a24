#include <doctest.h>

#include "incq/compiler.hpp"
#include "incq/parser.hpp"

using namespace incq;

namespace {

Script parse_script(const std::string &src) {
    auto lr = load_program(src);
    REQUIRE(lr.ok());
    return *lr.script;
}

std::string flatten_obj(const std::vector<ObjInstr> &instrs, const ObjBlock &b, int depth = 0) {
    std::string out;
    for (const auto &i : instrs) {
        out += std::string(depth * 2, ' ') + i.note + "\n";
        out += flatten_obj(i.body, b, depth + 1);
    }
    return out;
}

const char *kRunning =
    "query Q(celeb,group) demand(celeb,group): "
    "{ user.email : user in celeb.followers, user in group, user.loc == \"NYC\" }\n";

} // namespace

TEST_CASE("the filtered field handler lowers to guarded object operations") {
    // The trace carries a deletion, so the counted result store survives.
    Script s = parse_script(std::string(kRunning) + "new u1\nnewset g1\nadd g1 u1\ndel g1 u1\n");
    CompileOptions opts;
    opts.mode = Mode::Fil;
    auto compiled = compile_script(s, opts);
    REQUIRE(compiled.size() == 1);
    const ObjPlan &op = compiled[0].oplan;

    const auto &blocks = op.handlers.at("F_loc:+").blocks;
    REQUIRE(blocks.size() == 1);
    const ObjBlock &b = blocks[0];

    // if user in T_user / cond / hasfield email / dom-guarded filtered image /
    // dom-guarded demand image / hasfield followers / isset+membership / cadd.
    std::vector<ObjInstr::Op> spine;
    const ObjInstr *cur = &b.instrs[0];
    while (true) {
        spine.push_back(cur->op);
        if (cur->body.empty()) break;
        cur = &cur->body.back();
    }
    CHECK(spine == std::vector<ObjInstr::Op>{
                       ObjInstr::Op::TagTest, ObjInstr::Op::CondTest, ObjInstr::Op::HasFieldBind,
                       ObjInstr::Op::MapForImage, ObjInstr::Op::MapForImage,
                       ObjInstr::Op::HasFieldBind, ObjInstr::Op::IsSetElemTest,
                       ObjInstr::Op::ResultUpd});

    // The result store is counted: an email can have two derivations.
    CHECK(op.result_counted);
    CHECK(op.stores[op.result_store].counted);
}

TEST_CASE("no full scans of virtual relations remain in lowered plans") {
    Script s = parse_script(kRunning);
    for (Mode m : {Mode::Inc, Mode::Fil, Mode::FilOsq}) {
        CompileOptions opts;
        opts.mode = m;
        auto compiled = compile_script(s, opts);
        std::function<void(const std::vector<ObjInstr> &)> walk =
            [&](const std::vector<ObjInstr> &instrs) {
                for (const auto &i : instrs) {
                    if (i.op == ObjInstr::Op::MapForImage) CHECK(!i.key_slots.empty());
                    walk(i.body);
                }
            };
        for (const auto &[key, h] : compiled[0].oplan.handlers)
            for (const auto &b : h.blocks) walk(b.instrs);
    }
}

TEST_CASE("uniqueness of derivations enables counting elimination") {
    Script jql2 = parse_script(
        "query Q(attends,students): { (a, s) : a in attends, s in students, "
        "a.course == \"COMP101\", a.student == s }\n"
        "newset attends\nnewset students\nnew a0\nadd attends a0\ndel attends a0\n");
    CHECK(unique_derivations(compile_script(jql2, {}).at(0).rq));

    CompileOptions opts;
    opts.mode = Mode::Inc;
    auto compiled = compile_script(jql2, opts);
    CHECK(!compiled[0].oplan.result_counted); // unique even though deletions occur

    opts.no_count_elim = true;
    compiled = compile_script(jql2, opts);
    CHECK(compiled[0].oplan.result_counted);
}

TEST_CASE("the running example keeps counts: users are not determined by emails") {
    Script s = parse_script(std::string(kRunning) +
                            "new u1\nnewset g1\nadd g1 u1\ndel g1 u1\n");
    CHECK(!unique_derivations(compile_script(s, {}).at(0).rq));
    CompileOptions opts;
    opts.mode = Mode::Inc;
    CHECK(compile_script(s, opts)[0].oplan.result_counted);
}

TEST_CASE("an additions-only trace drops the counts") {
    Script s = parse_script(std::string(kRunning) +
                            "new u1\nnewset g1\nu1.loc = \"NYC\"\nadd g1 u1\n");
    CompileOptions opts;
    opts.mode = Mode::Inc;
    CHECK(!compile_script(s, opts)[0].oplan.result_counted);

    // One reassigned field forces counts back.
    Script s2 = parse_script(std::string(kRunning) +
                             "new u1\nnewset g1\nu1.loc = \"NYC\"\nu1.loc = \"LA\"\nadd g1 u1\n");
    CHECK(compile_script(s2, opts)[0].oplan.result_counted);
}

TEST_CASE("filtered relations are uncounted and tag sets counted") {
    Script s = parse_script(kRunning);
    CompileOptions opts;
    opts.mode = Mode::Fil;
    const ObjPlan &op = compile_script(s, opts)[0].oplan;
    for (const auto &sd : op.stores) {
        if (sd.kind == StoreDesc::Kind::FilteredInverse) CHECK(!sd.counted);
        if (sd.kind == StoreDesc::Kind::TagSet) CHECK(sd.counted);
    }
}

TEST_CASE("membership tests in conditions compile for naive use only") {
    // Reading set contents inside a condition is not a function of the
    // variable values; changes to t would escape maintenance entirely.
    Script s = parse_script("query N(s,t): { x : x in s, not x in t }");
    CompileOptions opts;
    opts.mode = Mode::Inc;
    CHECK_THROWS_AS(compile_script(s, opts), std::invalid_argument);
}
