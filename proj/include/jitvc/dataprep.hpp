#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "jitvc/metrics.hpp"

namespace jitvc::dataprep {

// Row-major labelled table. Labels are 0/1; 1 is the defect-inducing class.
struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::vector<std::string> ids;
    std::vector<std::int64_t> timestamps;

    std::size_t size() const noexcept { return rows.size(); }
    std::size_t width() const noexcept { return feature_names.size(); }
    std::vector<double> column(std::size_t j) const;
    std::size_t positives() const noexcept;
    // Same rows restricted to `names` (in that order). Throws MissingFeature.
    Dataset select(const std::vector<std::string>& names) const;
    void push_back(std::vector<double> row, int label, std::string id = {}, std::int64_t timestamp = 0);
};

Dataset from_features(const std::vector<metrics::FeatureVector>& features);

struct Split {
    Dataset train;
    Dataset test;
};

// Sorted by (timestamp, id); the first floor(fraction * n) rows train.
// Throws TooFewRows when n < 5.
Split time_split(const Dataset& data, double train_fraction = 0.8);

// nullopt when either input is constant. Throws InvalidConfig on length
// mismatch or fewer than two points.
std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y);

std::vector<double> average_ranks(std::span<const double> values);

// VIF of columns[j] regressed (with intercept) on every other column.
// +infinity for exact collinearity, including a constant target column.
double vif(std::size_t j, const std::vector<std::vector<double>>& columns);

struct DroppedFeature {
    enum class Reason { Correlation, Vif };
    std::string feature;
    Reason reason = Reason::Correlation;
    std::string partner;  // correlation partner; empty for VIF drops
    double score = 0;     // |rho| or VIF at the time of the drop
};

struct FeatureSelection {
    std::vector<std::string> kept;
    std::vector<DroppedFeature> dropped;
};

struct AutoSpearmanConfig {
    double correlation_threshold = 0.7;
    double vif_threshold = 5.0;
    bool category_floor = true;
    // feature -> category; when empty, categories come from the metric names.
    std::map<std::string, std::string> categories;
};

FeatureSelection autospearman(const Dataset& train, const AutoSpearmanConfig& config = {});

nlohmann::ordered_json to_json(const FeatureSelection& selection);
FeatureSelection selection_from_json(const nlohmann::json& j);

struct SmoteConfig {
    std::size_t k = 5;
    std::uint64_t seed = 42;
};

struct SyntheticOrigin {
    std::size_t base = 0;      // input row index
    std::size_t neighbor = 0;  // input row index
    double gap = 0;            // u in base + u * (neighbor - base)
};

struct SmoteResult {
    Dataset data;                         // input rows, then synthetic rows
    std::vector<SyntheticOrigin> origins;  // one per synthetic row
    std::vector<bool> boolean_columns;
};

SmoteResult smote(const Dataset& train, const SmoteConfig& config = {});

std::string dataset_csv(const Dataset& data);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace jitvc::dataprep
