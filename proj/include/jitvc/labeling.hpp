#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "jitvc/repo_miner.hpp"

namespace jitvc::labeling {

using mining::History;
using mining::Repository;

enum class FixStrategy { Keywords, IssueLinks };
FixStrategy fix_strategy_from_string(std::string_view name);  // throws UnknownStrategy
std::string_view to_string(FixStrategy strategy) noexcept;

// How far back SZZ-VC follows a node: every prior add/modify of the node, or
// only the latest one.
enum class ChangeDepth { Max, MostRecent };
ChangeDepth change_depth_from_string(std::string_view name);
std::string_view to_string(ChangeDepth depth) noexcept;

struct IssueRecord {
    std::string key;
    bool is_defect = false;
    std::string fix_commit;
};

std::vector<std::string> default_defect_keywords();

struct FixConfig {
    FixStrategy strategy = FixStrategy::Keywords;
    std::vector<std::string> keywords = default_defect_keywords();
    std::string issue_pattern = "[A-Z][A-Z0-9]+-[0-9]+";
    std::vector<IssueRecord> issues;
};

// issue-key,is_defect,fix-commit-hash; a header row is optional.
std::vector<IssueRecord> read_issues_csv(const std::filesystem::path& path);

bool matches_keyword(std::string_view message, const std::vector<std::string>& keywords);

std::set<std::string> identify_fix_commits(const History& history, const FixConfig& config);

struct Evidence {
    enum class Kind { Line, Node };
    std::string fix_commit;
    Kind kind = Kind::Line;
    std::string path;
    std::string reference;  // "L<n>" on the parent side, or a path-qualified node id

    auto operator<=>(const Evidence&) const = default;
};

// inducing commit -> evidence
using Attribution = std::map<std::string, std::vector<Evidence>>;

struct SzzConfig {
    ChangeDepth depth = ChangeDepth::Max;
    bool parallel = true;
};

Attribution szz_textual(const Repository& repo, const History& history, const std::string& fix_commit);
Attribution szz_vc(const History& history, const std::string& fix_commit, ChangeDepth depth = ChangeDepth::Max,
                   std::vector<std::string>* skipped = nullptr);

std::set<std::string> inducing_set(const Attribution& attribution);

struct LabelSet {
    std::set<std::string> fix_commits;
    std::set<std::string> inducing_commits;
    std::set<std::string> textual_inducing;
    std::set<std::string> visual_inducing;
    std::map<std::string, std::vector<Evidence>> provenance;
    std::vector<std::string> skipped;  // visual files SZZ-VC could not trace

    bool is_fix(const std::string& hash) const { return fix_commits.contains(hash); }
    bool is_inducing(const std::string& hash) const { return inducing_commits.contains(hash); }
    mining::LabelFacts facts() const;
};

LabelSet label_commits(const Repository& repo, const History& history, const std::set<std::string>& fixes,
                       const SzzConfig& config = {});

bool is_comment_or_blank(std::string_view path, std::string_view line);

void write_labels_jsonl(const std::filesystem::path& path, const History& history, const LabelSet& labels);
LabelSet read_labels_jsonl(const std::filesystem::path& path);

}  // namespace jitvc::labeling
