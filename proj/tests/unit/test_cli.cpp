#include <doctest.h>

#include <json.hpp>

#include "fixture_repo.hpp"
#include "jitvc/io.hpp"
#include "jitvc/process.hpp"
#include "support/test_support.hpp"

using namespace jitvc;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

ProcessResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), JITVC_CLI_PATH);
    return run_process(args);
}

void expect_ok(const ProcessResult& r) {
    INFO("stderr: " << r.err);
    REQUIRE(r.exit_code == 0);
}

// Every stderr line is a JSON object carrying an error code.
void expect_json_errors(const std::string& err) {
    auto lines = io::split_lines(err);
    REQUIRE_FALSE(lines.empty());
    for (const auto& line : lines) {
        auto j = nlohmann::json::parse(line, nullptr, false);
        REQUIRE_MESSAGE(j.is_object(), line);
        CHECK(j.contains("code"));
        CHECK(j.contains("message"));
    }
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("stage subcommands reproduce `run` byte for byte") {
    TempDir tmp("cli");
    auto fx = fixture::build_fixture_repo(tmp / "fixture", {.total_commits = 220});
    const auto repo = fx.path.string();
    const auto a = (tmp / "a").string(), b = (tmp / "b").string();

    auto run = cli({"run", "--repo", repo, "--out", a});
    expect_ok(run);
    CHECK(run.out.find("fixture: complete") != std::string::npos);

    expect_ok(cli({"mine", "--repo", repo, "--out", b, "--serial"}));
    expect_ok(cli({"label", "--repo", repo, "--out", b}));
    for (const char* stage : {"features", "prepare", "train", "evaluate", "rank", "report"}) {
        INFO(stage);
        expect_ok(cli({stage, "--project", "fixture", "--out", b}));
    }

    auto ta = testing::tree_contents(a), tb = testing::tree_contents(b);
    CHECK(ta.size() == tb.size());
    for (const auto& [name, bytes] : ta) {
        REQUIRE_MESSAGE(tb.contains(name), name);
        CHECK_MESSAGE(tb[name] == bytes, name);
    }
    CHECK(ta.contains("models/fixture/XGB_Combined.json"));
}

TEST_CASE("exit codes") {
    TempDir tmp("cli-exit");
    fixture::build_fixture_repo(tmp / "good", {.total_commits = 210});
    const auto out = (tmp / "out").string();

    SUBCASE("a failing project exits 1 and logs JSON") {
        auto r = cli({"run", "--repo", (tmp / "good").string(), "--repo", (tmp / "nowhere").string(), "--out", out});
        CHECK(r.exit_code == 1);
        expect_json_errors(r.err);
        CHECK(r.err.find("RepoNotFound") != std::string::npos);
        CHECK(fs::exists(tmp / "out" / "good" / "report.json"));
        CHECK(fs::exists(tmp / "out" / "errors.jsonl"));
    }
    SUBCASE("configuration errors exit 2 with a JSON error line") {
        for (std::vector<std::string> args : {
                 std::vector<std::string>{"run", "--repo", (tmp / "good").string(), "--train-fraction", "1.5"},
                 std::vector<std::string>{"run", "--repo", (tmp / "good").string(), "--pool", "mean"},
                 std::vector<std::string>{"run", "--repo", (tmp / "good").string(), "--depth", "deepest"},
                 std::vector<std::string>{"features", "--project", "absent"},
                 std::vector<std::string>{"run", "--repo", (tmp / "good").string(), "--no-such-flag"},
                 std::vector<std::string>{"train"},
             }) {
            args.push_back("--out");
            args.push_back(out);
            auto r = cli(args);
            INFO(args[0] << " " << args.back());
            CHECK(r.exit_code == 2);
            expect_json_errors(r.err);
        }
    }
    SUBCASE("mine prints the eligibility report") {
        auto r = cli({"mine", "--repo", (tmp / "good").string(), "--out", out});
        expect_ok(r);
        auto j = nlohmann::json::parse(r.out);
        CHECK(j["commit_count"] == 210);
        CHECK(j["enough_commits"] == true);
    }
}

}  // TEST_SUITE
