#pragma once

// End-to-end orchestration: each stage reads and writes plain files under
// <out>/<project>/ so stages can run individually or chained.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "jitvc/dataprep.hpp"
#include "jitvc/evaluation.hpp"
#include "jitvc/labeling.hpp"
#include "jitvc/learners.hpp"
#include "jitvc/metrics.hpp"
#include "jitvc/repo_miner.hpp"

namespace jitvc::pipeline {

struct RunConfig {
    std::vector<std::filesystem::path> repos;
    std::string branch = "HEAD";
    mining::MinerConfig miner;
    labeling::FixConfig fix;
    labeling::SzzConfig szz;
    dataprep::AutoSpearmanConfig autospearman;
    dataprep::SmoteConfig smote;
    double train_fraction = 0.8;
    std::uint64_t seed = 1;  // learner seed; cells derive their own
    evaluation::Pooling pooling = evaluation::Pooling::Models;
    bool enforce_eligibility = true;
    bool parallel = true;
    std::filesystem::path out = "out";

    // Throws InvalidConfig.
    void validate() const;
};

std::string project_name(const std::filesystem::path& repo);

struct ProjectPaths {
    std::filesystem::path dir;
    std::filesystem::path models;

    ProjectPaths(const std::filesystem::path& out, const std::string& project);
    std::filesystem::path commits() const { return dir / "commits.jsonl"; }
    std::filesystem::path labels() const { return dir / "labels.jsonl"; }
    std::filesystem::path features() const { return dir / "features.csv"; }
    std::filesystem::path selection() const { return dir / "selection.json"; }
    std::filesystem::path train_balanced() const { return dir / "train_balanced.csv"; }
    std::filesystem::path test() const { return dir / "test.csv"; }
    std::filesystem::path evaluation() const { return dir / "evaluation.csv"; }
    std::filesystem::path ranks() const { return dir / "ranks.json"; }
    std::filesystem::path report() const { return dir / "report.json"; }
};

// --- file-type distribution ------------------------------------------------------------------

struct ComboTable {
    std::array<std::size_t, mining::kFileTypeComboCount> counts{};
    std::size_t total() const;
    double percentage(std::size_t i) const;  // 0 when the table is empty
    nlohmann::ordered_json to_json() const;
};

enum class Majority { MoreVisual, MoreTextual };
std::string_view to_string(Majority m) noexcept;
Majority majority_from_string(std::string_view s);

struct FileTypeReport {
    ComboTable all;
    ComboTable fix;
    std::size_t visual_commits = 0;   // commits touching any visual code file
    std::size_t textual_commits = 0;  // commits touching any textual code file
    Majority majority = Majority::MoreTextual;  // ties go to more-textual
};

FileTypeReport file_type_report(const mining::History& history, const std::set<std::string>& fix_commits);
FileTypeReport aggregate(const std::vector<FileTypeReport>& reports);

// --- stages ------------------------------------------------------------------------------

struct Prepared {
    dataprep::Split split;
    dataprep::FeatureSelection selection;
    dataprep::Dataset balanced;
};

mining::History stage_mine(const mining::Repository& repo, const RunConfig& config, const ProjectPaths& paths);
labeling::LabelSet stage_label(const mining::Repository& repo, const mining::History& history,
                               const RunConfig& config, const ProjectPaths& paths);
std::vector<metrics::FeatureVector> stage_features(const mining::History& history, const labeling::LabelSet& labels,
                                                   const RunConfig& config, const ProjectPaths& paths);
// `features` must carry commit timestamps.
Prepared stage_prepare(const std::vector<metrics::FeatureVector>& features, const RunConfig& config,
                       const ProjectPaths& paths);
std::vector<learners::MatrixCell> stage_train(const dataprep::Dataset& balanced,
                                              const dataprep::FeatureSelection& selection, const RunConfig& config,
                                              const ProjectPaths& paths);
std::vector<evaluation::EvalRow> stage_evaluate(const std::string& project,
                                                const std::vector<learners::MatrixCell>& cells,
                                                const dataprep::Dataset& test, const RunConfig& config,
                                                const ProjectPaths& paths);
nlohmann::ordered_json stage_rank(const std::vector<evaluation::EvalRow>& rows, const RunConfig& config,
                                  const ProjectPaths& paths);

// Reloads persisted artifacts for the stand-alone subcommands.
std::vector<metrics::FeatureVector> load_features_with_timestamps(const ProjectPaths& paths);
std::vector<learners::MatrixCell> load_models(const ProjectPaths& paths);

// --- reports -------------------------------------------------------------------------------

struct ProjectReport {
    std::string project;
    enum class Status { Complete, Ineligible } status = Status::Complete;
    mining::EligibilityReport eligibility;
    FileTypeReport file_types;
    std::optional<mining::LabelFacts> label_facts;
    std::size_t inducing_commits = 0;
    std::size_t skipped_visual_files = 0;
    std::size_t feature_rows = 0;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    std::size_t balanced_rows = 0;
    std::vector<std::string> kept_features;
    std::vector<std::pair<std::string, std::string>> failed_cells;  // model file stem -> error
    std::vector<evaluation::EvalRow> evaluation;
    nlohmann::ordered_json ranks;
};

nlohmann::ordered_json to_json(const ProjectReport& report);
ProjectReport report_from_json(const nlohmann::json& j);

struct GroupComparison {
    std::size_t visual_projects = 0;
    std::size_t textual_projects = 0;
    std::size_t visual_values = 0;
    std::size_t textual_values = 0;
    evaluation::RankSumResult test;
    bool reject = false;  // p < 0.05
};

// Rank-sum test of more-visual against more-textual projects. Throws EmptyGroup.
GroupComparison group_compare(const std::vector<ProjectReport>& reports, evaluation::Metric metric,
                              evaluation::Pooling pooling = evaluation::Pooling::Models);

struct ProjectFailure {
    std::string project;
    std::string stage;
    std::string code;
    std::string message;
};

struct RunResult {
    std::vector<ProjectReport> reports;
    std::vector<ProjectFailure> failures;
    bool ok() const { return failures.empty(); }
};

// Rebuilds a project's report from whichever artifacts exist under `paths`.
ProjectReport report_from_artifacts(const std::string& project, const RunConfig& config);

// Runs one project end to end, writing every artifact and report.json.
ProjectReport run_project(const std::filesystem::path& repo, const RunConfig& config);

// All projects (in parallel), then the cross-project outputs:
// <out>/ranks.json, <out>/summary.json and, when anything failed,
// <out>/errors.jsonl.
RunResult run_pipeline(const RunConfig& config);

// Cross-project outputs from already computed reports.
void write_summary(const RunConfig& config, const std::vector<ProjectReport>& reports,
                   const std::vector<ProjectFailure>& failures);

}  // namespace jitvc::pipeline
