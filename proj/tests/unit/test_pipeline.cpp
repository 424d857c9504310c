#include <doctest.h>

#include <random>

#include <json.hpp>

#include "fixture_repo.hpp"
#include "jitvc/error.hpp"
#include "jitvc/io.hpp"
#include "jitvc/pipeline.hpp"
#include "support/test_support.hpp"

using namespace jitvc;
using namespace jitvc::pipeline;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

mining::CommitRecord commit_touching(const std::string& hash, std::vector<mining::FileClass> classes) {
    mining::CommitRecord c;
    c.hash = hash;
    c.author_id = "ada";
    for (std::size_t i = 0; i < classes.size(); ++i) {
        mining::FileChange ch;
        ch.path = "f" + std::to_string(i);
        ch.change_kind = mining::ChangeKind::Added;
        ch.file_class = classes[i];
        c.changes.push_back(ch);
    }
    return c;
}

ProjectReport scored(Majority majority, const std::vector<double>& aucs) {
    ProjectReport r;
    r.file_types.majority = majority;
    for (double a : aucs) {
        evaluation::EvalRow row;
        row.score.auc = a;
        row.score.mcc = a - 0.5;
        r.evaluation.push_back(row);
    }
    return r;
}

RunConfig config_for(const fs::path& out, std::vector<fs::path> repos) {
    RunConfig c;
    c.out = out;
    c.repos = std::move(repos);
    return c;
}

std::size_t idx(mining::FileTypeCombo c) { return static_cast<std::size_t>(c); }

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("file_type_report counting examples") {
    using mining::FileClass;
    mining::History h;
    for (int i = 0; i < 4; ++i) h.push_back(commit_touching("v" + std::to_string(i), {FileClass::VisualCode}));
    for (int i = 0; i < 3; ++i) h.push_back(commit_touching("t" + std::to_string(i), {FileClass::TextualCode}));
    for (int i = 0; i < 3; ++i) h.push_back(commit_touching("n" + std::to_string(i), {FileClass::NonCode}));

    auto r = file_type_report(h, {});
    CHECK(r.all.total() == 10);
    CHECK(r.all.percentage(idx(mining::FileTypeCombo::OnlyVisual)) == 40.0);
    CHECK(r.all.percentage(idx(mining::FileTypeCombo::OnlyTextual)) == 30.0);
    CHECK(r.all.percentage(idx(mining::FileTypeCombo::OnlyNonCode)) == 30.0);
    CHECK(r.majority == Majority::MoreVisual);
    CHECK(r.fix.total() == 0);
    for (std::size_t i = 0; i < mining::kFileTypeComboCount; ++i) CHECK(r.fix.percentage(i) == 0.0);

    auto with_fix = file_type_report(h, {"v0", "t1"});
    CHECK(with_fix.fix.total() == 2);
    CHECK(with_fix.fix.percentage(idx(mining::FileTypeCombo::OnlyVisual)) == 50.0);

    h.push_back(commit_touching("tv", {FileClass::TextualCode, FileClass::VisualCode, FileClass::NonCode}));
    auto tie = file_type_report(h, {});
    CHECK(tie.visual_commits == 5);
    CHECK(tie.textual_commits == 4);
    h.push_back(commit_touching("t3", {FileClass::TextualCode}));
    tie = file_type_report(h, {});
    CHECK(tie.visual_commits == tie.textual_commits);
    CHECK(tie.majority == Majority::MoreTextual);
    CHECK(tie.all.counts[idx(mining::FileTypeCombo::TextualVisualNonCode)] == 1);

    auto agg = aggregate({r, tie});
    CHECK(agg.all.total() == 22);
    CHECK(agg.visual_commits == 9);
    CHECK(majority_from_string(to_string(Majority::MoreVisual)) == Majority::MoreVisual);
}

TEST_CASE("property: combo counts sum to the commit total") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        mining::History h;
        std::set<std::string> fixes;
        const auto n = rng() % 40;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<mining::FileClass> cls(rng() % 4);
            for (auto& c : cls) c = static_cast<mining::FileClass>(rng() % 3);
            h.push_back(commit_touching("c" + std::to_string(i), cls));
            if (rng() % 3 == 0) fixes.insert(h.back().hash);
        }
        auto r = file_type_report(h, fixes);
        CHECK(r.all.total() == n);
        CHECK(r.fix.total() == fixes.size());
        double sum = 0;
        for (std::size_t i = 0; i < mining::kFileTypeComboCount; ++i) sum += r.all.percentage(i);
        if (n > 0) CHECK(std::fabs(sum - 100.0) < 1e-9);
    }
}

TEST_CASE("group_compare examples") {
    std::vector<ProjectReport> disjoint = {scored(Majority::MoreVisual, {0.9, 0.91, 0.92, 0.93}),
                                           scored(Majority::MoreVisual, {0.94, 0.95, 0.96}),
                                           scored(Majority::MoreTextual, {0.5, 0.51, 0.52, 0.53}),
                                           scored(Majority::MoreTextual, {0.54, 0.55, 0.56})};
    auto g = group_compare(disjoint, evaluation::Metric::Auc);
    CHECK(g.reject);
    CHECK(g.visual_projects == 2);
    CHECK(g.textual_values == 7);
    CHECK(g.test.p < 0.01);
    CHECK(group_compare(disjoint, evaluation::Metric::Mcc).reject);

    auto medians = group_compare(disjoint, evaluation::Metric::Auc, evaluation::Pooling::Medians);
    CHECK(medians.visual_values == 2);
    CHECK_FALSE(medians.reject);  // 2 vs 2 cannot reach p < 0.05 exactly

    std::vector<ProjectReport> one_sided = {scored(Majority::MoreTextual, {0.6}), scored(Majority::MoreTextual, {0.7})};
    try {
        group_compare(one_sided, evaluation::Metric::Auc);
        FAIL("expected EmptyGroup");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyGroup);
    }
}

TEST_CASE("property: same-distribution groups reject at about alpha") {
    std::mt19937_64 rng(2024);
    int rejections = 0;
    const int resamples = 200;
    for (int s = 0; s < resamples; ++s) {
        std::vector<ProjectReport> reports;
        for (int p = 0; p < 10; ++p) {
            std::vector<double> aucs(24);
            for (auto& a : aucs) a = testing::uniform01(rng);
            reports.push_back(scored(p % 2 ? Majority::MoreVisual : Majority::MoreTextual, aucs));
        }
        rejections += group_compare(reports, evaluation::Metric::Auc).reject ? 1 : 0;
    }
    const double rate = static_cast<double>(rejections) / resamples;
    MESSAGE("rejection rate " << rate);
    CHECK(rate >= 0.01);
    CHECK(rate <= 0.10);
}

TEST_CASE("RunConfig::validate") {
    RunConfig ok;
    CHECK_NOTHROW(ok.validate());
    auto expect_invalid = [](RunConfig c) {
        try {
            c.validate();
            FAIL("expected InvalidConfig");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidConfig);
        }
    };
    RunConfig c = ok;
    c.train_fraction = 1.0;
    expect_invalid(c);
    c = ok;
    c.autospearman.correlation_threshold = 0;
    expect_invalid(c);
    c = ok;
    c.autospearman.vif_threshold = -1;
    expect_invalid(c);
    c = ok;
    c.smote.k = 0;
    expect_invalid(c);
    c = ok;
    c.fix.keywords.clear();
    expect_invalid(c);
    c = ok;
    c.branch.clear();
    expect_invalid(c);

    CHECK(project_name("/a/b/proj/") == "proj");
    CHECK(project_name("proj") == "proj");
}

TEST_CASE("run_pipeline on the fixture writes every artifact; stages replay it byte for byte") {
    TempDir tmp("pipe");
    auto fx = fixture::build_fixture_repo(tmp / "fixture");
    auto config = config_for(tmp / "out", {fx.path});
    auto result = run_pipeline(config);
    REQUIRE(result.ok());
    REQUIRE(result.reports.size() == 1);
    const auto& report = result.reports[0];
    CHECK(report.status == ProjectReport::Status::Complete);
    CHECK(report.evaluation.size() == 24);
    CHECK(report.failed_cells.empty());

    const ProjectPaths paths(config.out, "fixture");
    for (const auto& f : {paths.commits(), paths.labels(), paths.features(), paths.selection(),
                          paths.train_balanced(), paths.evaluation(), paths.ranks(), paths.report()}) {
        CHECK_MESSAGE(fs::exists(f), f.string());
    }
    std::size_t model_files = 0;
    for (const auto& e : fs::directory_iterator(paths.models)) model_files += e.path().extension() == ".json";
    CHECK(model_files == 24);
    CHECK(fs::exists(config.out / "summary.json"));
    CHECK(fs::exists(config.out / "ranks.json"));
    CHECK_FALSE(fs::exists(config.out / "errors.jsonl"));

    // The labels match the generator's ground truth.
    auto labels = labeling::read_labels_jsonl(paths.labels());
    CHECK(labels.fix_commits == fx.fix_commits());
    CHECK(labels.inducing_commits == fx.inducing_commits());

    // report.json percentages recompute from commits.jsonl.
    auto j = nlohmann::json::parse(io::read_text(paths.report()));
    auto history = mining::read_commits_jsonl(paths.commits());
    std::array<std::size_t, mining::kFileTypeComboCount> counts{};
    for (const auto& c : history) ++counts[static_cast<std::size_t>(mining::commit_file_combo(c))];
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const std::string name(mining::to_string(mining::file_type_combo_at(i)));
        CHECK(j["file_types"]["all"]["counts"][name] == counts[i]);
        CHECK(j["file_types"]["all"]["percentages"][name].get<double>() ==
              100.0 * static_cast<double>(counts[i]) / static_cast<double>(history.size()));
    }
    CHECK(j["eligibility"]["eligible"] == true);

    // Chaining the stages by hand (serially) gives the same tree.
    auto replay = config_for(tmp / "replay", {fx.path});
    replay.parallel = false;
    const ProjectPaths rp(replay.out, "fixture");
    auto repo = mining::open_git_repository(fx.path);
    auto h = stage_mine(*repo, replay, rp);
    auto l = stage_label(*repo, h, replay, rp);
    stage_features(h, l, replay, rp);
    auto prepared = stage_prepare(load_features_with_timestamps(rp), replay, rp);
    stage_train(prepared.balanced, prepared.selection, replay, rp);
    auto rows = stage_evaluate("fixture", load_models(rp), dataprep::read_dataset_csv(rp.test()), replay, rp);
    stage_rank(rows, replay, rp);
    auto rebuilt = report_from_artifacts("fixture", replay);
    write_summary(replay, {rebuilt}, {});

    auto a = testing::tree_contents(config.out), b = testing::tree_contents(replay.out);
    CHECK(a.size() == b.size());
    for (const auto& [name, bytes] : a) {
        REQUIRE_MESSAGE(b.contains(name), name);
        CHECK_MESSAGE(b[name] == bytes, name);
    }

    // report_from_json is the inverse of to_json for the fields it keeps.
    auto back = report_from_json(j);
    CHECK(back.project == "fixture");
    CHECK(back.evaluation.size() == 24);
    CHECK(back.file_types.all.counts == report.file_types.all.counts);
}

TEST_CASE("ineligible repository halts after the eligibility check") {
    TempDir tmp("inelig");
    fixture::build_filler_repo(tmp / "small", 150);
    auto config = config_for(tmp / "out", {tmp / "small"});
    auto result = run_pipeline(config);
    REQUIRE(result.ok());
    REQUIRE(result.reports.size() == 1);
    CHECK(result.reports[0].status == ProjectReport::Status::Ineligible);
    CHECK(result.reports[0].eligibility.commit_count == 150);
    CHECK_FALSE(result.reports[0].eligibility.enough_commits);
    const ProjectPaths paths(config.out, "small");
    auto j = nlohmann::json::parse(io::read_text(paths.report()));
    CHECK(j["status"] == "ineligible");
    CHECK(j["eligibility"]["eligible"] == false);
    CHECK(fs::exists(paths.commits()));
    CHECK_FALSE(fs::exists(paths.labels()));
    CHECK_FALSE(fs::exists(paths.models));
}

TEST_CASE("one bad repository path is recorded while the other project completes") {
    TempDir tmp("tworepo");
    fixture::build_fixture_repo(tmp / "good", {.total_commits = 220});
    auto config = config_for(tmp / "out", {tmp / "good", tmp / "missing"});
    auto result = run_pipeline(config);
    REQUIRE(result.reports.size() == 1);
    REQUIRE(result.failures.size() == 1);
    CHECK(result.reports[0].project == "good");
    CHECK(result.failures[0].project == "missing");
    CHECK(result.failures[0].stage == "mine");
    CHECK(result.failures[0].code == "RepoNotFound");
    auto log = io::split_lines(io::read_text(config.out / "errors.jsonl"));
    REQUIRE(log.size() == 1);
    CHECK(nlohmann::json::parse(log[0])["code"] == "RepoNotFound");

    auto dup = config_for(tmp / "out2", {tmp / "good", tmp / "x" / "good"});
    CHECK_THROWS_AS(run_pipeline(dup), Error);
}

}  // TEST_SUITE
