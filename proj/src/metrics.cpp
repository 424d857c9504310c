#include "jitvc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "jitvc/error.hpp"
#include "jitvc/io.hpp"

namespace jitvc::metrics {

using mining::ChangeKind;
using mining::FileChange;
using mining::FileClass;

double shannon_entropy_normalized(std::span<const double> weights) {
    double total = 0;
    std::size_t nonzero = 0;
    for (double w : weights) {
        if (!(w >= 0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidConfig, "entropy weights must be finite and >= 0");
        if (w > 0) {
            total += w;
            ++nonzero;
        }
    }
    if (nonzero == 0) throw Error(ErrorCode::AllZeroWeights, "no positive weight");
    if (nonzero == 1) return 0.0;
    double h = 0;
    for (double w : weights) {
        if (w > 0) {
            double p = w / total;
            h -= p * std::log2(p);
        }
    }
    return std::clamp(h / std::log2(static_cast<double>(nonzero)), 0.0, 1.0);
}

std::string_view to_string(Category category) noexcept {
    switch (category) {
    case Category::Process: return "process";
    case Category::Textual: return "textual";
    case Category::Visual: return "visual";
    }
    return "process";
}

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = {
        "total_modified_file_size", "avg_modified_file_size", "num_unique_dirs", "avg_dir_depth",
        "num_files_modified",       "avg_age_days",           "avg_revisions_per_file",
        "num_developers",           "num_unique_changes",     "developer_experience",
        "is_fix",                   "lines_added",            "lines_deleted",
        "loc_before",               "code_entropy",           "nodes_added",
        "nodes_modified",           "nodes_deleted",          "nodes_before",
        "node_entropy",
    };
    return names;
}

Category category_of(std::string_view feature) {
    const auto& names = feature_names();
    auto it = std::find(names.begin(), names.end(), feature);
    if (it == names.end()) throw Error(ErrorCode::MissingFeature, std::string(feature));
    auto pos = static_cast<std::size_t>(it - names.begin());
    if (pos < 11) return Category::Process;
    if (pos < 15) return Category::Textual;
    return Category::Visual;
}

std::vector<double> FeatureVector::values() const {
    return {process.total_modified_file_size,
            process.avg_modified_file_size,
            process.num_unique_dirs,
            process.avg_dir_depth,
            process.num_files_modified,
            process.avg_age_days,
            process.avg_revisions_per_file,
            process.num_developers,
            process.num_unique_changes,
            process.developer_experience,
            process.is_fix ? 1.0 : 0.0,
            textual.lines_added,
            textual.lines_deleted,
            textual.loc_before,
            textual.code_entropy,
            visual.nodes_added,
            visual.nodes_modified,
            visual.nodes_deleted,
            visual.nodes_before,
            visual.node_entropy};
}

namespace {

double entropy_or_zero(const std::vector<double>& weights) {
    try {
        return shannon_entropy_normalized(weights);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::AllZeroWeights) return 0.0;
        throw;
    }
}

// What the prior history says about one modified file.
struct PriorInfo {
    std::vector<std::size_t> commits;  // positions, ascending
};

ProcessMetrics assemble_process(const History& history, std::size_t position, bool is_fix,
                                const std::vector<const FileChange*>& files, const std::vector<PriorInfo>& prior,
                                std::size_t author_prior_commits) {
    const auto& commit = history[position];
    ProcessMetrics m;
    m.is_fix = is_fix;
    m.developer_experience = static_cast<double>(author_prior_commits);
    if (files.empty()) return m;

    std::set<std::string> dirs;
    double depth_sum = 0;
    double age_sum = 0;
    std::size_t aged = 0;
    double revisions = 0;
    std::set<std::string> authors;
    std::set<std::size_t> changes;
    for (std::size_t k = 0; k < files.size(); ++k) {
        const auto& f = *files[k];
        m.total_modified_file_size += static_cast<double>(f.size_after);
        auto slash = f.path.find_last_of('/');
        dirs.insert(slash == std::string::npos ? std::string{} : f.path.substr(0, slash));
        depth_sum += static_cast<double>(std::count(f.path.begin(), f.path.end(), '/'));

        const auto& p = prior[k];
        revisions += static_cast<double>(p.commits.size());
        if (!p.commits.empty()) {
            auto last_ts = history[p.commits.back()].timestamp;
            age_sum += std::max<double>(0.0, static_cast<double>(commit.timestamp - last_ts) / 86400.0);
            ++aged;
        }
        for (auto c : p.commits) {
            authors.insert(history[c].author_id);
            changes.insert(c);
        }
    }
    const auto n = static_cast<double>(files.size());
    m.avg_modified_file_size = m.total_modified_file_size / n;
    m.num_unique_dirs = static_cast<double>(dirs.size());
    m.avg_dir_depth = depth_sum / n;
    m.num_files_modified = n;
    m.avg_age_days = aged == 0 ? 0.0 : age_sum / static_cast<double>(aged);
    m.avg_revisions_per_file = revisions / n;
    m.num_developers = static_cast<double>(authors.size());
    m.num_unique_changes = static_cast<double>(changes.size());
    return m;
}

std::vector<const FileChange*> code_files(const CommitRecord& commit) {
    std::vector<const FileChange*> out;
    for (const auto& ch : commit.changes) {
        if (ch.is_code()) out.push_back(&ch);
    }
    return out;
}

FeatureVector make_row(const CommitRecord& commit, const labeling::LabelSet& labels, ProcessMetrics process) {
    FeatureVector fv;
    fv.commit_hash = commit.hash;
    fv.timestamp = commit.timestamp;
    fv.process = process;
    fv.textual = textual_metrics(commit);
    fv.visual = visual_metrics(commit);
    fv.is_defect_inducing = labels.is_inducing(commit.hash);
    return fv;
}

}  // namespace

TextualMetrics textual_metrics(const CommitRecord& commit) {
    TextualMetrics m;
    std::vector<double> weights;
    for (const auto& ch : commit.changes) {
        if (ch.file_class != FileClass::TextualCode) continue;
        m.lines_added += static_cast<double>(ch.lines_added);
        m.lines_deleted += static_cast<double>(ch.lines_deleted);
        m.loc_before += static_cast<double>(ch.lines_before);
        weights.push_back(static_cast<double>(ch.lines_added + ch.lines_deleted));
    }
    m.code_entropy = entropy_or_zero(weights);
    return m;
}

VisualMetrics visual_metrics(const CommitRecord& commit) {
    VisualMetrics m;
    std::vector<double> weights;
    for (const auto& ch : commit.changes) {
        if (ch.file_class != FileClass::VisualCode || !ch.graph_diff) continue;
        const auto& d = *ch.graph_diff;
        m.nodes_added += static_cast<double>(d.added.size());
        m.nodes_modified += static_cast<double>(d.modified.size());
        m.nodes_deleted += static_cast<double>(d.deleted.size());
        m.nodes_before += static_cast<double>(d.nodes_before);
        weights.push_back(static_cast<double>(d.changed()));
    }
    m.node_entropy = entropy_or_zero(weights);
    return m;
}

// --- parallel kernel ------------------------------------------------------------

HistoryIndex::HistoryIndex(const History& history) : history_(&history) {
    // Sequential lineage pass: renames carry a file's lineage to its new path.
    std::unordered_map<std::string, std::size_t> lineage_at;
    std::unordered_map<std::string, std::size_t> author_slots;
    lineage_of_change_.resize(history.size());
    author_slot_.resize(history.size());
    constexpr auto kNone = static_cast<std::size_t>(-1);

    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& commit = history[i];
        auto& lineages = lineage_of_change_[i];
        lineages.assign(commit.changes.size(), kNone);
        for (std::size_t k = 0; k < commit.changes.size(); ++k) {
            if (auto it = lineage_at.find(commit.changes[k].previous_path()); it != lineage_at.end()) {
                lineages[k] = it->second;
            }
        }
        for (const auto& ch : commit.changes) {
            if (ch.change_kind != ChangeKind::Renamed) continue;
            if (auto it = lineage_at.find(ch.old_path); it != lineage_at.end()) {
                auto id = it->second;
                lineage_at.erase(it);
                lineage_at[ch.path] = id;
            }
        }
        for (const auto& ch : commit.changes) {
            auto [it, inserted] = lineage_at.try_emplace(ch.path, touches_.size());
            if (inserted) touches_.emplace_back();
            touches_[it->second].push_back(i);
        }

        auto [slot, fresh] = author_slots.try_emplace(commit.author_id, author_commits_.size());
        if (fresh) author_commits_.emplace_back();
        author_commits_[slot->second].push_back(i);
        author_slot_[i] = slot->second;
    }
}

ProcessMetrics HistoryIndex::process_metrics(std::size_t position, bool is_fix) const {
    const auto& commit = (*history_)[position];
    std::vector<const FileChange*> files;
    std::vector<PriorInfo> prior;
    for (std::size_t k = 0; k < commit.changes.size(); ++k) {
        if (!commit.changes[k].is_code()) continue;
        files.push_back(&commit.changes[k]);
        PriorInfo info;
        auto lineage = lineage_of_change_[position][k];
        if (lineage != static_cast<std::size_t>(-1)) {
            const auto& t = touches_[lineage];
            info.commits.assign(t.begin(), std::lower_bound(t.begin(), t.end(), position));
            info.commits.erase(std::unique(info.commits.begin(), info.commits.end()), info.commits.end());
        }
        prior.push_back(std::move(info));
    }
    const auto& mine = author_commits_[author_slot_[position]];
    auto author_prior = static_cast<std::size_t>(std::lower_bound(mine.begin(), mine.end(), position) - mine.begin());
    return assemble_process(*history_, position, is_fix, files, prior, author_prior);
}

std::vector<FeatureVector> extract_features_parallel(const History& history, const labeling::LabelSet& labels) {
    const HistoryIndex index(history);
    std::vector<FeatureVector> rows(history.size());
    const auto n = static_cast<std::ptrdiff_t>(history.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto pos = static_cast<std::size_t>(i);
        rows[pos] = make_row(history[pos], labels, index.process_metrics(pos, labels.is_fix(history[pos].hash)));
    }
    return rows;
}

// --- serial reference -------------------------------------------------------------

std::vector<FeatureVector> extract_features_serial(const History& history, const labeling::LabelSet& labels) {
    std::map<std::string, std::vector<std::size_t>> by_path;
    std::map<std::string, std::size_t> author_commits;
    std::vector<FeatureVector> rows;
    rows.reserve(history.size());

    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& commit = history[i];
        auto files = code_files(commit);
        std::vector<PriorInfo> prior;
        for (const auto* f : files) {
            PriorInfo info;
            if (auto it = by_path.find(f->previous_path()); it != by_path.end()) {
                info.commits = it->second;
                info.commits.erase(std::unique(info.commits.begin(), info.commits.end()), info.commits.end());
            }
            prior.push_back(std::move(info));
        }
        auto process = assemble_process(history, i, labels.is_fix(commit.hash), files, prior,
                                        author_commits[commit.author_id]);
        rows.push_back(make_row(commit, labels, process));

        for (const auto& ch : commit.changes) {
            if (ch.change_kind != ChangeKind::Renamed) continue;
            if (auto it = by_path.find(ch.old_path); it != by_path.end()) {
                auto moved = std::move(it->second);
                by_path.erase(it);
                by_path[ch.path] = std::move(moved);
            }
        }
        for (const auto& ch : commit.changes) by_path[ch.path].push_back(i);
        ++author_commits[commit.author_id];
    }
    return rows;
}

// --- features.csv ----------------------------------------------------------------

std::string features_csv(const std::vector<FeatureVector>& rows) {
    std::string out = "hash";
    for (const auto& name : feature_names()) out += "," + name;
    out += ",is_defect_inducing\n";
    for (const auto& row : rows) {
        out += row.commit_hash;
        for (double v : row.values()) out += "," + io::format_double(v);
        out += row.is_defect_inducing ? ",1\n" : ",0\n";
    }
    return out;
}

void write_features_csv(const std::filesystem::path& path, const std::vector<FeatureVector>& rows) {
    io::write_text(path, features_csv(rows));
}

std::vector<FeatureVector> read_features_csv(const std::filesystem::path& path) {
    auto lines = io::split_lines(io::read_text(path));
    if (lines.empty()) throw Error(ErrorCode::Io, "empty features file " + path.string());
    std::vector<FeatureVector> rows;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(lines[li]);
        for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(cell);
        if (cols.size() != kFeatureCount + 2) throw Error(ErrorCode::Io, "bad column count in " + path.string());
        std::vector<double> v;
        for (std::size_t k = 1; k <= kFeatureCount; ++k) v.push_back(std::stod(cols[k]));
        FeatureVector fv;
        fv.commit_hash = cols[0];
        fv.process = {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10] != 0.0};
        fv.textual = {v[11], v[12], v[13], v[14]};
        fv.visual = {v[15], v[16], v[17], v[18], v[19]};
        fv.is_defect_inducing = cols.back() == "1";
        rows.push_back(std::move(fv));
    }
    return rows;
}

}  // namespace jitvc::metrics
