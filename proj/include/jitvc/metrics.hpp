#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jitvc/labeling.hpp"
#include "jitvc/repo_miner.hpp"

namespace jitvc::metrics {

using mining::CommitRecord;
using mining::History;

// Normalized Shannon entropy of a change distribution: H(p) / log2(n) where n
// counts the strictly positive weights; 0 when n == 1. Throws AllZeroWeights.
double shannon_entropy_normalized(std::span<const double> weights);

struct ProcessMetrics {
    double total_modified_file_size = 0;
    double avg_modified_file_size = 0;
    double num_unique_dirs = 0;
    double avg_dir_depth = 0;
    double num_files_modified = 0;
    double avg_age_days = 0;
    double avg_revisions_per_file = 0;
    double num_developers = 0;
    double num_unique_changes = 0;
    double developer_experience = 0;
    bool is_fix = false;

    bool operator==(const ProcessMetrics&) const = default;
};

struct TextualMetrics {
    double lines_added = 0;
    double lines_deleted = 0;
    double loc_before = 0;
    double code_entropy = 0;

    bool operator==(const TextualMetrics&) const = default;
};

struct VisualMetrics {
    double nodes_added = 0;
    double nodes_modified = 0;
    double nodes_deleted = 0;
    double nodes_before = 0;
    double node_entropy = 0;

    bool operator==(const VisualMetrics&) const = default;
};

enum class Category { Process, Textual, Visual };
std::string_view to_string(Category category) noexcept;

inline constexpr std::size_t kFeatureCount = 20;

// Column order of features.csv between the hash and the label.
const std::vector<std::string>& feature_names();
Category category_of(std::string_view feature);

struct FeatureVector {
    std::string commit_hash;
    std::int64_t timestamp = 0;  // carried for splitting; not a feature
    ProcessMetrics process;
    TextualMetrics textual;
    VisualMetrics visual;
    bool is_defect_inducing = false;

    std::vector<double> values() const;
    bool operator==(const FeatureVector&) const = default;
};

TextualMetrics textual_metrics(const CommitRecord& commit);
VisualMetrics visual_metrics(const CommitRecord& commit);

// Immutable prior-history index: every code-file lineage (rename-aware) and
// every author mapped to the sorted positions of the commits that touched it.
class HistoryIndex {
public:
    explicit HistoryIndex(const History& history);

    ProcessMetrics process_metrics(std::size_t position, bool is_fix) const;

private:
    const History* history_;
    std::vector<std::vector<std::size_t>> lineage_of_change_;  // [commit][change] -> lineage id
    std::vector<std::vector<std::size_t>> touches_;            // lineage id -> commit positions
    std::vector<std::vector<std::size_t>> author_commits_;     // author slot -> commit positions
    std::vector<std::size_t> author_slot_;                     // commit position -> author slot
};

// Incremental single pass; kept as the reference for the parallel kernel.
std::vector<FeatureVector> extract_features_serial(const History& history, const labeling::LabelSet& labels);
std::vector<FeatureVector> extract_features_parallel(const History& history, const labeling::LabelSet& labels);

std::string features_csv(const std::vector<FeatureVector>& rows);
void write_features_csv(const std::filesystem::path& path, const std::vector<FeatureVector>& rows);
// Timestamps are not part of the file; callers join them from commits.jsonl.
std::vector<FeatureVector> read_features_csv(const std::filesystem::path& path);

}  // namespace jitvc::metrics
