#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include <clonekit/expr.hpp>
#include <json.hpp>

namespace {

struct run_result {
    int status;
    std::string out;
};

run_result run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" CLONEKIT_CLI_PATH "\" " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, {}};
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    const int rc = pclose(p);
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

nlohmann::json run_json(const std::string& args, const std::string& env = "") {
    const auto r = run(args + " --json", env);
    EXPECT_EQ(r.status, 0) << r.out;
    return nlohmann::json::parse(r.out);
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto p = std::filesystem::temp_directory_path() / ("clonekit_cli_" + std::to_string(::getpid()) + "_" + name);
    std::ofstream(p) << content;
    return p;
}

}  // namespace

TEST(Cli, ClassifyExamples) {
    EXPECT_NE(run("classify 'ite(x0,x1,x2)@3'").out.find("clone: T0T1"), std::string::npos);
    EXPECT_EQ(run_json("classify 'forall(2; x0,x1,x2)@3'")["clone"], "DualMono");
    EXPECT_EQ(run_json("classify '0@1'")["clone"], "Unary(0)");
}

TEST(Cli, ClassifyProfileAndLiteralRoundTrip) {
    const auto j = run_json("classify 'xor(x0,x1)@2'");
    EXPECT_EQ(j["clone"], "AffT0");
    EXPECT_TRUE(j["profile"]["Zero"].get<bool>());
    EXPECT_FALSE(j["profile"]["LEQ"].get<bool>());
    const auto lit = j["input"].get<std::string>();
    EXPECT_EQ(clonekit::parse_function(lit), clonekit::parse_function("xor(x0,x1)@2"));
}

TEST(Cli, ParseErrorsReportPositionAndExitTwo) {
    const auto r = run("classify 'and(x0,,x1)@2'");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.out.find("position"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("verify nosuch").status, 2);
    EXPECT_EQ(run("classify 'x0@1' --nosuchflag").status, 2);
    EXPECT_EQ(run("").status, 2);
    EXPECT_EQ(run("lattice nosuch").status, 2);
}

TEST(Cli, ResourceBudgetExitsThree) {
    EXPECT_EQ(run("closure 'or(x0,x1)@2' 'not(x0)@1' --cap 4 --budget 100").status, 3);
}

TEST(Cli, VerifyFiberMT0T1) {
    const auto r = run("verify fiber_MT0T1 --json");
    ASSERT_EQ(r.status, 0) << r.out.substr(0, 400);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["overall"], "pass");
    EXPECT_EQ(j["suite"], "fiber_MT0T1");
    EXPECT_EQ(j["checks"][0]["claim"].get<std::string>().find("has 9 catalogued clones") != std::string::npos, true);
}

TEST(Cli, VerifyWritesReportFile) {
    const auto out = std::filesystem::temp_directory_path() / ("clonekit_cli_report_" + std::to_string(::getpid()) + ".json");
    const auto r = run("verify wadge --out " + out.string());
    EXPECT_EQ(r.status, 0);
    std::ifstream in(out);
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["overall"], "pass");
    std::filesystem::remove(out);
}

TEST(Cli, LatticeExports) {
    EXPECT_EQ(run_json("lattice fiber:MT0")["nodes"].size(), 6u);
    EXPECT_EQ(run_json("lattice fig1")["nodes"].size(), 62u);
    const auto d = run("lattice side_tube:2 --dot");
    EXPECT_EQ(d.status, 0);
    EXPECT_EQ(d.out.rfind("digraph", 0), 0u);
    EXPECT_EQ(run_json("lattice side_tube:2")["nodes"].size(), 4u);
}

TEST(Cli, ClosureAndMember) {
    EXPECT_EQ(run_json("closure 'and(x0,x1)@2'")["clone"], "MeetT0T1");
    const auto m = run_json("member 'and(x0,x1)@2' 'or(x0,x1)@2' 'not(x0)@1'");
    EXPECT_EQ(m["verdict"], "yes");
    // The emitted term re-parses to the query.
    EXPECT_EQ(clonekit::parse_function(m["term"].get<std::string>()), clonekit::parse_function("and(x0,x1)@2"));
    const auto no = run_json("member 'not(x0)@1' 'and(x0,x1)@2'");
    EXPECT_EQ(no["verdict"], "no");
    EXPECT_TRUE(no.contains("relation"));
}

TEST(Cli, PolByNodeAndRelation) {
    EXPECT_EQ(run_json("pol M")["strata"][2]["size"], 20);
    // Monotone and 0,1-preserving: only x0 at arity 1; x0, x1, and, or at arity 2.
    const auto p = run_json("pol LEQ Zero One");
    EXPECT_EQ(p["strata"][0]["size"], 1);
    EXPECT_EQ(p["strata"][1]["size"], 4);
}

TEST(Cli, EvalRefuteSearch) {
    EXPECT_EQ(run("eval liminf '0(1)'").out, "1\n");
    EXPECT_EQ(run("eval 'forallw(2)' '00(1)'").out, "0\n");
    const auto mfile = temp_file("m.json", R"j({"row_cycle":[{"template":"1(0)","fill":"(0)"}],"shift":1})j");
    EXPECT_EQ(run("refute bigjoin 'LimEq(0)' @" + mfile.string()).status, 0);
    EXPECT_EQ(run("refute x0 'LimEq(0)' @" + mfile.string()).status, 1);
    std::filesystem::remove(mfile);
    const auto s = run_json("search bigjoin 'LimEq(0)'");
    EXPECT_FALSE(s["matrix"].is_null());
    EXPECT_TRUE(run_json("search 'and(x0,bigjoin{[|x1@stride 1]})' 'LimEq(0)'")["matrix"].is_null());
}

TEST(Cli, ReadsStandardInput) {
    const auto r = run("classify - --json < /dev/stdin", "printf 'and(x0,x1)@2' |");
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_EQ(nlohmann::json::parse(r.out)["clone"], "MeetT0T1");
}

TEST(Cli, JsonOutputIsByteIdentical) {
    const auto a = run("search 'limsup' 'LimEq(1)' --seed 3 --json");
    const auto b = run("search 'limsup' 'LimEq(1)' --seed 3 --json");
    EXPECT_EQ(a.out, b.out);
    const auto c = run("verify cobweb_k2 --json");
    const auto d = run("verify cobweb_k2 --json");
    EXPECT_EQ(c.out, d.out);
}

TEST(Cli, SettingsPrecedence) {
    const auto cfg = temp_file("cfg.json", R"({"seed": 3})");
    const std::string config = "--config " + cfg.string();
    EXPECT_EQ(run_json("search bigmeet 'LimEq(1)' " + config)["seed"], 3);
    EXPECT_EQ(run_json("search bigmeet 'LimEq(1)' " + config, "CLONEKIT_SEED=5")["seed"], 5);
    EXPECT_EQ(run_json("search bigmeet 'LimEq(1)' --seed 9 " + config, "CLONEKIT_SEED=5")["seed"], 9);
    EXPECT_EQ(run_json("search bigmeet 'LimEq(1)'")["seed"], 7);
    const auto bad = temp_file("bad.json", R"({"nosuch": 1})");
    EXPECT_EQ(run("search bigmeet 'LimEq(1)' --config " + bad.string()).status, 2);
    std::filesystem::remove(cfg);
    std::filesystem::remove(bad);
}

TEST(Cli, DataDirFlagOverridesEnvironment) {
    EXPECT_EQ(run("catalog nodes", "CLONEKIT_DATA_DIR=/nonexistent").status, 2);
    EXPECT_EQ(run("catalog nodes --data-dir " + std::string(CLONEKIT_DATA_DIR), "CLONEKIT_DATA_DIR=/nonexistent").status, 0);
}

TEST(Cli, CatalogListings) {
    EXPECT_EQ(run_json("catalog nodes").size(), 62u);
    EXPECT_EQ(run_json("catalog fibers").size(), 9u);
    EXPECT_EQ(run_json("catalog DualMono")["group"], "dual");
    EXPECT_EQ(run("catalog nosuch").status, 2);
}
