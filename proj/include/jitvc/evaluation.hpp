#pragma once

// Model scoring (AUC, MCC), two-sample comparison (Wilcoxon rank-sum,
// Cliff's delta) and Non-Parametric Scott-Knott ranking.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jitvc/learners.hpp"

namespace jitvc::evaluation {

using learners::FeatureCombo;
using learners::LearnerKind;

// Mann-Whitney estimator with mean ranks for ties. Throws SingleClass.
double auc(std::span<const double> probabilities, std::span<const int> labels);

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const Confusion&) const = default;
};

// Predicted positive iff probability >= threshold.
Confusion confusion(std::span<const double> probabilities, std::span<const int> labels,
                    double threshold = learners::kDecisionThreshold);

// 0 when any denominator factor is 0.
double mcc(const Confusion& c);

struct Score {
    std::optional<double> auc;  // absent when the test split holds one class
    double mcc = 0;
    Confusion confusion;
};

Score score(std::span<const double> probabilities, std::span<const int> labels);

struct RankSumResult {
    double u = 0;  // Mann-Whitney U of the first sample
    double p = 1;  // two-sided
    bool exact = false;
};

inline constexpr std::size_t kExactRankSumLimit = 20;
inline constexpr double kAlpha = 0.05;

// Exact permutation distribution (ties kept at their mid-ranks) when the
// combined size is at most kExactRankSumLimit; otherwise the tie-corrected
// normal approximation with continuity correction.
RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

double cliffs_delta(std::span<const double> a, std::span<const double> b);

inline constexpr double kNegligibleDelta = 0.147;

double median(std::vector<double> values);

struct RankGroup {
    int rank = 0;
    std::vector<std::string> treatments;  // in descending-median order
};
using RankGroups = std::vector<RankGroup>;

using Treatments = std::vector<std::pair<std::string, std::vector<double>>>;

// Treatment names must be unique and every list non-empty (InvalidConfig).
RankGroups npsk_rank(const Treatments& treatments);

nlohmann::ordered_json to_json(const RankGroups& groups);

// --- scoring tables ------------------------------------------------------------------

struct EvalRow {
    std::string project;
    LearnerKind kind = LearnerKind::LR;
    FeatureCombo combo = FeatureCombo::Base;
    Score score;
};

// One row per trained cell, in matrix order. Parallel over models.
std::vector<EvalRow> score_matrix(const std::string& project, const std::vector<learners::MatrixCell>& cells,
                                  const dataprep::Dataset& test, bool parallel = true);

std::string evaluation_csv(const std::vector<EvalRow>& rows);
void write_evaluation_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows);
std::vector<EvalRow> read_evaluation_csv(const std::filesystem::path& path);

enum class Metric { Auc, Mcc };
enum class Dimension { ByCombo, ByLearner };
// Cross-project pooling: every model score, or one median per project.
enum class Pooling { Models, Medians };

Pooling pooling_from_string(std::string_view s);

// Treatments for one (dimension, metric); rows lacking the metric are skipped.
Treatments treatments_for(const std::vector<EvalRow>& rows, Dimension dim, Metric metric,
                          Pooling pooling = Pooling::Models);

// {"by_combo": {"auc": groups, "mcc": groups}, "by_learner": {...}}
nlohmann::ordered_json rank_tables(const std::vector<EvalRow>& rows, Pooling pooling = Pooling::Models);

}  // namespace jitvc::evaluation
