#pragma once

// The six classifier families, trained in-repo with fixed defaults. Every
// source of randomness is an explicit seed, so (data, seed) determines the
// fitted parameters bit for bit.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "jitvc/dataprep.hpp"

namespace jitvc::learners {

using dataprep::Dataset;

enum class LearnerKind { LR, DT, RF, GBM, XGB, NN };
enum class FeatureCombo { Base, Textual, Visual, Combined };

inline constexpr std::array kAllKinds = {LearnerKind::LR, LearnerKind::DT, LearnerKind::RF,
                                         LearnerKind::GBM, LearnerKind::XGB, LearnerKind::NN};
inline constexpr std::array kAllCombos = {FeatureCombo::Base, FeatureCombo::Textual, FeatureCombo::Visual,
                                          FeatureCombo::Combined};

std::string_view to_string(LearnerKind kind) noexcept;
std::string_view to_string(FeatureCombo combo) noexcept;
LearnerKind learner_kind_from_string(std::string_view s);
FeatureCombo feature_combo_from_string(std::string_view s);

// Combo columns: the process/textual/visual groups the combo names,
// intersected with `kept` (order of `kept` preserved).
std::vector<std::string> combo_features(FeatureCombo combo, const std::vector<std::string>& kept);

// splitmix64 over (seed, kind, combo); each matrix cell owns its stream.
std::uint64_t derive_seed(std::uint64_t seed, LearnerKind kind, FeatureCombo combo) noexcept;

using Matrix = std::vector<std::vector<double>>;

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& x);
    std::vector<double> apply(std::span<const double> row) const;
    Matrix apply(const Matrix& x) const;
};

// --- trees ---------------------------------------------------------------------

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> x) const;
    std::size_t depth() const;
};

struct TreeOptions {
    std::size_t min_samples_split = 2;
    std::size_t max_depth = 0;     // 0 = unlimited
    std::size_t max_features = 0;  // 0 = all features in column order
};

// Information-gain classification tree; leaves hold the positive fraction.
Tree fit_classification_tree(const Matrix& x, const std::vector<int>& y, const TreeOptions& options,
                             std::uint64_t seed, const std::vector<std::size_t>& sample = {});

// --- logistic regression -------------------------------------------------------------

struct LogisticParams {
    std::vector<double> weights;
    double intercept = 0;
};

struct LogisticOptions {
    double l2 = 1.0;
    std::size_t max_iterations = 1000;
    double gradient_tolerance = 1e-6;
};

// Sum of log-losses plus l2/2 * |w|^2 (intercept unpenalized).
double logistic_objective(const LogisticParams& params, const Matrix& x, const std::vector<int>& y, double l2);
// Gradient ordered as (weights..., intercept).
std::vector<double> logistic_gradient(const LogisticParams& params, const Matrix& x, const std::vector<int>& y,
                                      double l2);
LogisticParams fit_logistic(const Matrix& x, const std::vector<int>& y, const LogisticOptions& options = {});

// --- ensembles ---------------------------------------------------------------------

struct ForestParams {
    std::vector<Tree> trees;
};

struct ForestOptions {
    std::size_t n_trees = 100;
    bool bootstrap = true;
    bool sqrt_features = true;
    bool parallel = true;
};

ForestParams fit_forest(const Matrix& x, const std::vector<int>& y, const ForestOptions& options, std::uint64_t seed);

struct BoostParams {
    double base_score = 0;  // raw log-odds before the first tree
    std::vector<Tree> trees;  // leaf values already include the learning rate
};

struct GbmOptions {
    std::size_t n_rounds = 100;
    std::size_t max_depth = 3;
    double learning_rate = 0.1;
};

struct XgbOptions {
    std::size_t n_rounds = 100;
    std::size_t max_depth = 6;
    double learning_rate = 0.3;
    double lambda = 1.0;
    double min_child_weight = 1.0;
};

// `loss_trace`, when given, receives the mean training log-loss before the
// first round and after every round.
BoostParams fit_gbm(const Matrix& x, const std::vector<int>& y, const GbmOptions& options = {},
                    std::vector<double>* loss_trace = nullptr);
BoostParams fit_xgb(const Matrix& x, const std::vector<int>& y, const XgbOptions& options = {},
                    std::vector<double>* loss_trace = nullptr);

// --- neural network -------------------------------------------------------------------

struct MlpParams {
    std::size_t inputs = 0;
    std::size_t hidden = 0;
    std::vector<double> w1;  // hidden x inputs, row-major
    std::vector<double> b1;
    std::vector<double> w2;  // hidden
    double b2 = 0;
};

struct MlpOptions {
    std::size_t hidden = 100;
    std::size_t epochs = 200;
    std::size_t batch_size = 200;
    double learning_rate = 1e-3;
    double alpha = 1e-4;
};

MlpParams fit_mlp(const Matrix& x, const std::vector<int>& y, const MlpOptions& options, std::uint64_t seed);

// --- trained model ----------------------------------------------------------------------

using Parameters = std::variant<LogisticParams, Tree, ForestParams, BoostParams, MlpParams>;

struct TrainedModel {
    LearnerKind kind = LearnerKind::LR;
    FeatureCombo combo = FeatureCombo::Base;
    std::vector<std::string> feature_names;
    std::optional<Standardizer> standardizer;  // LR and NN
    Parameters params;
    std::uint64_t seed = 0;
};

inline constexpr double kDecisionThreshold = 0.5;

TrainedModel train(LearnerKind kind, const Dataset& data, FeatureCombo combo, const std::vector<std::string>& kept,
                   std::uint64_t seed);

// `row` is in the model's feature order.
double predict_proba(const TrainedModel& model, std::span<const double> row);
// Throws MissingFeature when a model feature is absent.
double predict_proba(const TrainedModel& model, const std::map<std::string, double>& row);
std::vector<double> predict_proba(const TrainedModel& model, const Dataset& data);

nlohmann::ordered_json to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

// --- 6 x 4 matrix ------------------------------------------------------------------------

struct MatrixCell {
    LearnerKind kind;
    FeatureCombo combo;
    std::optional<TrainedModel> model;
    std::string error;  // set when the cell failed, e.g. EmptyFeatureSet
};

std::vector<MatrixCell> train_matrix(const Dataset& balanced_train, const std::vector<std::string>& kept,
                                     std::uint64_t seed, bool parallel = true);

std::string model_file_name(LearnerKind kind, FeatureCombo combo);

}  // namespace jitvc::learners
