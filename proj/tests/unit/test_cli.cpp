#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "support/corpus.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "dsol_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Run run(const std::string& args) {
    auto err = fs::temp_directory_path() / "dsol_cli_test_stderr.txt";
    std::string cmd = std::string(DSOLOPT) + " " + args + " 2>" + err.string();
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = testsupport::slurp(err);
    return r;
}

std::string corpus(const std::string& name) { return testsupport::corpus_path(name).string(); }
std::string scenario(const std::string& name) { return (fs::path(DSOL_DATA_DIR) / "scenarios" / name).string(); }

// Report JSON without wall-clock fields.
nlohmann::json untimed(const fs::path& report) {
    auto j = nlohmann::json::parse(testsupport::slurp(report));
    j.erase("output");
    j["totals"].erase("seconds");
    j["totals"].erase("avg_seconds");
    for (auto& o : j["outcomes"])
        for (auto& it : o["iterations"]) {
            it.erase("seconds");
            if (it["verdict"].is_object()) it["verdict"].erase("seconds");
        }
    return j;
}

} // namespace

TEST(Cli, OptimizeWithMockScenario) {
    auto dir = scratch("optimize");
    auto r = run("optimize " + corpus("fig1a_storage.dsol") + " --provider mock --scenario " + scenario("fig1a.json") +
                 " -o " + dir.string());
    ASSERT_EQ(r.code, 0) << r.err;
    auto text = testsupport::slurp(dir / "fig1a_storage.opt.dsol");
    EXPECT_NE(text.find("mapping(bytes32=>uint256) uintStorage;"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "fig1a_storage.report.json"));
    EXPECT_NE(r.out.find("fig1a_storage.dsol"), std::string::npos);
}

TEST(Cli, VerifyFig4IsNonEquivalentAndExitsZero) {
    auto r = run("verify " + corpus("fig4_signature.dsol") + " " + corpus("fig4_signature_opt.dsol"));
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("NonEquivalent"), std::string::npos) << r.out;
    auto j = run("verify --json " + corpus("fig4_signature.dsol") + " " + corpus("fig4_signature_opt.dsol"));
    EXPECT_EQ(nlohmann::json::parse(j.out)["functions"][0]["verdict"]["outcome"], "NonEquivalent");
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("optimize " + corpus("token.dsol") + " --bogus").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("optimize " + corpus("token.dsol") + " --iterations 0 --scenario " + scenario("fig1a.json")).code, 2);
    auto r = run("optimize " + corpus("token.dsol") + " --provider mock");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--scenario"), std::string::npos);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, HardErrorsExitOne) {
    auto dir = scratch("hard");
    auto r = run("optimize /nonexistent/x.dsol --scenario " + scenario("fig1a.json") + " -o " + dir.string());
    EXPECT_EQ(r.code, 1);
    auto line = r.err.substr(0, r.err.find('\n'));
    EXPECT_EQ(nlohmann::json::parse(line)["level"], "error");
    EXPECT_EQ(run("verify " + corpus("token.dsol") + " " + corpus("token.dsol") + " --solver /nonexistent/z3").code, 0);
    EXPECT_EQ(run("verify " + corpus("fig4_signature.dsol") + " " + corpus("fig4_signature_opt.dsol") +
                  " --solver /nonexistent/z3")
                  .code,
              1);
    auto bad = dir / "bad_truth.json";
    std::ofstream(bad) << R"({"unit":"token.dsol","attributes":[{"slot":"s","label":"Treasury"}]})";
    EXPECT_EQ(run("score " + corpus("token.dsol") + " -t " + bad.string()).code, 1);
}

TEST(Cli, MalformedScenarioKeepsFilesByteIdentical) {
    auto dir = scratch("malformed");
    std::string inputs;
    for (const auto& f : testsupport::corpus_files()) inputs += " " + f.string();
    auto r = run("optimize" + inputs + " --scenario " + scenario("malformed.json") + " -o " + dir.string());
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& f : testsupport::corpus_files()) {
        auto out = dir / (f.stem().string() + ".opt.dsol");
        EXPECT_EQ(testsupport::slurp(out), testsupport::slurp(f)) << f;
        auto j = nlohmann::json::parse(testsupport::slurp(dir / (f.stem().string() + ".report.json")));
        for (const auto& o : j["outcomes"]) EXPECT_EQ(o["status"], "MalformedReply");
    }
}

TEST(Cli, RunsAreDeterministic) {
    auto a = scratch("det_a");
    auto b = scratch("det_b");
    std::string common = " " + corpus("fig1a_storage.dsol") + " " + corpus("fig1c_handle.dsol") + " --scenario " +
                         scenario("fig1a.json") + " -o ";
    ASSERT_EQ(run("optimize" + common + a.string()).code, 0);
    ASSERT_EQ(run("optimize" + common + b.string() + " -j 1").code, 0);
    for (const char* stem : {"fig1a_storage", "fig1c_handle"}) {
        EXPECT_EQ(testsupport::slurp(a / (std::string(stem) + ".opt.dsol")),
                  testsupport::slurp(b / (std::string(stem) + ".opt.dsol")));
        EXPECT_EQ(untimed(a / (std::string(stem) + ".report.json")), untimed(b / (std::string(stem) + ".report.json")));
    }
}

TEST(Cli, ScoreReadsReportsAndTruth) {
    auto dir = scratch("score");
    ASSERT_EQ(run("optimize " + corpus("fig1a_storage.dsol") + " --scenario " + scenario("fig1a.json") + " -o " +
                  dir.string())
                  .code,
              0);
    std::string truth = (fs::path(DSOL_DATA_DIR) / "truth").string();
    auto r = run("score " + (dir / "fig1a_storage.report.json").string() + " -t " + truth + " --json");
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["boundary"]["tp"], 3);
    EXPECT_EQ(j["type"]["fp"], 0);
    auto text = run("score " + (dir / "fig1a_storage.opt.dsol").string() + " -t " + truth);
    EXPECT_EQ(text.code, 0);
    EXPECT_NE(text.out.find("recall"), std::string::npos);
}

TEST(Cli, AnalyzeExportsGraphs) {
    auto dir = scratch("analyze");
    auto r = run("analyze " + corpus("fig1a_storage.dsol") + " -o " + dir.string());
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* ext : {".ir.txt", ".cfg.txt", ".dfg.txt", ".calls.txt", ".dg.txt", ".dg.json"})
        EXPECT_TRUE(fs::exists(dir / (std::string("fig1a_storage") + ext))) << ext;
    EXPECT_NE(r.out.find("TD edges"), std::string::npos);
    nlohmann::json::parse(testsupport::slurp(dir / "fig1a_storage.dg.json"));
}

TEST(Cli, ConfigFileAndFlagOverrides) {
    auto dir = scratch("config");
    auto cfg = dir / "run.json";
    std::ofstream(cfg) << R"({"iteration_limit": 1})";
    auto r = run("optimize " + corpus("keccak_untyped.dsol") + " --config " + cfg.string() + " --scenario " +
                 scenario("always_bad.json") + " -o " + dir.string());
    ASSERT_EQ(r.code, 0) << r.err;
    auto report = nlohmann::json::parse(testsupport::slurp(dir / "keccak_untyped.report.json"));
    for (const auto& o : report["outcomes"])
        if (o["target"] == "type:hashId.x") EXPECT_EQ(o["iterations"].size(), 1u);
    r = run("optimize " + corpus("keccak_untyped.dsol") + " --config " + cfg.string() + " --iterations 3 --scenario " +
            scenario("always_bad.json") + " -o " + dir.string());
    report = nlohmann::json::parse(testsupport::slurp(dir / "keccak_untyped.report.json"));
    for (const auto& o : report["outcomes"])
        if (o["target"] == "type:hashId.x") {
            EXPECT_EQ(o["iterations"].size(), 3u);
            EXPECT_EQ(o["status"], "RejectedViolations");
        }
    std::ofstream(cfg) << R"({"iterations": 1})";
    EXPECT_EQ(run("optimize " + corpus("keccak_untyped.dsol") + " --config " + cfg.string() + " --scenario " +
                  scenario("always_bad.json") + " -o " + dir.string())
                  .code,
              1);
}
