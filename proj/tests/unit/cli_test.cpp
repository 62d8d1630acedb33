#include "reqsolve/cli.hpp"
#include "reqsolve/knowledge.hpp"
#include "reqsolve/report.hpp"
#include "reqsolve/solver.hpp"

#include "../support/scenarios.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace reqsolve;
using testutil::read_file;
using testutil::TempDir;
using testutil::write_file;

namespace {

const fs::path fixtures = REQSOLVE_FIXTURES;

testutil::Scenario scenario(const std::string& id) {
    for (auto& s : testutil::load_scenarios(fixtures))
        if (s.id == id) return s;
    throw std::runtime_error("no scenario " + id);
}

int run(const fs::path& config, std::optional<fs::path> out = std::nullopt, bool offline = false) {
    CommandLine cmd;
    cmd.config = config;
    cmd.output_dir = std::move(out);
    cmd.offline = offline;
    return execute(cmd);
}

}  // namespace

TEST(Report, ChangesAndText) {
    auto start = parse_requirements("a==1.0\nb==2.0\n");
    auto end = parse_requirements("a==1.0\nb==3.0\nc==0.1\n");
    EXPECT_EQ(requirement_changes(start, end).dump(),
              R"([{"from":"2.0","package":"b","to":"3.0"},{"from":null,"package":"c","to":"0.1"}])");

    ReportInput in;
    in.status = RunStatus::error;
    in.error_kind = "ConfigInvalid";
    in.error_message = "target_version: missing";
    auto j = report_json(in);
    EXPECT_EQ(j["schema"], 1);
    EXPECT_EQ(j["exit_code"], 1);
    EXPECT_TRUE(j["config"].is_null());
    EXPECT_EQ(j["error"]["kind"], "ConfigInvalid");
    auto text = report_text(j);
    EXPECT_NE(text.find("status: error (exit 1)"), std::string::npos);
    EXPECT_NE(text.find("ConfigInvalid: target_version: missing"), std::string::npos);
}

TEST(Cli, HappyPathWritesOutputs) {
    TempDir work;
    auto ws = testutil::prepare(scenario("a_torchvision_pin_conflict"), fixtures, work.path());
    CommandLine cmd;
    cmd.config = ws.config;
    cmd.dump_formula = "formula.smt2";
    cmd.max_iterations = 9;
    EXPECT_EQ(execute(cmd), 0);
    EXPECT_EQ(read_file(ws.output / "requirements.out.txt"), "numpy==1.18.0\ntorch==1.5.0\ntorchvision==0.6.0\n");
    auto report = nlohmann::json::parse(read_file(ws.output / "report.json"));
    EXPECT_EQ(report["status"], "compatible");
    EXPECT_EQ(report["config"]["max_iterations"], 9);
    EXPECT_EQ(report["changes"].size(), 2u);
    EXPECT_NE(read_file(ws.output / "report.txt").find("torchvision 0.5.0 -> 0.6.0"), std::string::npos);
    EXPECT_NE(read_file(ws.output / "formula.smt2").find("|torchvision==0.6.0|"), std::string::npos);

    // Every changed pin is traceable to a logged event.
    std::set<std::string> logged;
    for (const auto& e : report["events"])
        if (e["event"] == "change") logged.insert(e["package"].get<std::string>() + "==" + e["to"].get<std::string>());
    for (const auto& c : report["changes"])
        EXPECT_TRUE(logged.count(c["package"].get<std::string>() + "==" + c["to"].get<std::string>())) << c.dump();

    // Warm cache: an offline run reproduces the report apart from the flags it was given.
    EXPECT_EQ(run(ws.config, work / "again", true), 0);
    auto again = nlohmann::json::parse(read_file(work / "again" / "report.json"));
    report["config"]["offline"] = true;
    report["config"]["max_iterations"] = 50;
    EXPECT_EQ(again, report);
}

TEST(Cli, FatalErrorsExitOne) {
    TempDir work;
    auto s = scenario("a_torchvision_pin_conflict");
    auto ws = testutil::prepare(s, fixtures, work.path());
    auto text = read_file(ws.config);
    const auto project = (fixtures / s.fixture / "project").string();
    text.replace(text.find(project), project.size(), (work / "missing").string());
    write_file(work / "broken.conf", text);
    EXPECT_EQ(run(work / "broken.conf"), 1);
    auto report = nlohmann::json::parse(read_file(ws.output / "report.json"));
    EXPECT_EQ(report["status"], "error");
    EXPECT_EQ(report["error"]["kind"], "ConfigInvalid");
    EXPECT_FALSE(fs::exists(ws.output / "requirements.out.txt"));

    // Offline with a cold cache cannot reach any knowledge.
    EXPECT_EQ(run(ws.config, work / "cold", true), 1);
    EXPECT_EQ(nlohmann::json::parse(read_file(work / "cold" / "report.json"))["error"]["kind"], "IndexUnavailable");

    EXPECT_EQ(run(work / "no-such.conf", work / "none"), 1);
    EXPECT_EQ(nlohmann::json::parse(read_file(work / "none" / "report.json"))["error"]["kind"], "ConfigInvalid");
}

// Every fixture scenario end to end: exit code, pins and detected issues
// exactly; on success the pins satisfy every declared dependency.
TEST(Scenarios, AllFixturesMatchExpectations) {
    for (const auto& s : testutil::load_scenarios(fixtures)) {
        SCOPED_TRACE(s.id);
        TempDir work;
        auto ws = testutil::prepare(s, fixtures, work.path());
        EXPECT_EQ(run(ws.config), s.expected["exit_code"]);
        auto out = read_file(ws.output / "requirements.out.txt");
        EXPECT_EQ(out, s.expected["requirements"].get<std::string>());
        auto report = nlohmann::json::parse(read_file(ws.output / "report.json"));
        EXPECT_EQ(testutil::issue_summary(report["detected_issues"]), s.expected["detected_issues"]);
        if (report["status"] != "compatible") continue;
        EXPECT_TRUE(report["remaining_issues"].empty());

        KnowledgeStore store(nullptr, {ws.cache, true, {}});
        Assignment final_pins;
        std::map<ReleaseKey, std::vector<Dependency>> edges;
        for (const auto& pin : parse_requirements(out)) final_pins[pin.name] = pin.version;
        for (const auto& [name, version] : final_pins) edges[{name, version}] = store.dependencies(name, version);
        EXPECT_TRUE(validate(final_pins, edges).empty());
    }
}
