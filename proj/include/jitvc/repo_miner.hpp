#pragma once

// History mining over a version-control adapter. The adapter boundary is
// `Repository`; `open_git_repository` is the only implementation shipped.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jitvc/visual_graph.hpp"

namespace jitvc::mining {

enum class ChangeKind { Added, Modified, Deleted, Renamed };
enum class FileClass { TextualCode, VisualCode, NonCode };

enum class FileTypeCombo {
    OnlyNonCode,
    OnlyTextual,
    OnlyVisual,
    TextualNonCode,
    VisualNonCode,
    TextualVisual,
    TextualVisualNonCode,
};
inline constexpr std::size_t kFileTypeComboCount = 7;

std::string_view to_string(ChangeKind kind) noexcept;
std::string_view to_string(FileClass cls) noexcept;
std::string_view to_string(FileTypeCombo combo) noexcept;
ChangeKind change_kind_from_string(std::string_view s);
FileClass file_class_from_string(std::string_view s);
FileTypeCombo file_type_combo_at(std::size_t index);

struct FileChange {
    std::string path;
    std::string old_path;  // set for renames only
    ChangeKind change_kind = ChangeKind::Modified;
    FileClass file_class = FileClass::NonCode;
    std::uint64_t size_after = 0;
    std::uint64_t lines_added = 0;
    std::uint64_t lines_deleted = 0;
    std::uint64_t lines_before = 0;  // parent-side line count, textual files only
    std::optional<visual::GraphDiff> graph_diff;

    const std::string& previous_path() const noexcept { return old_path.empty() ? path : old_path; }
    bool is_code() const noexcept { return file_class != FileClass::NonCode; }
    bool operator==(const FileChange&) const = default;
};

struct CommitRecord {
    std::string hash;
    std::vector<std::string> parent_hashes;
    std::string author_id;
    std::int64_t timestamp = 0;
    std::string message;
    std::vector<FileChange> changes;

    bool operator==(const CommitRecord&) const = default;
};

using History = std::vector<CommitRecord>;

struct ClassifierConfig {
    std::vector<std::string> textual_extensions = default_textual_extensions();
    std::vector<std::string> visual_extensions = {".maxpat", ".maxhelp"};

    static std::vector<std::string> default_textual_extensions();
};

struct MinerConfig {
    ClassifierConfig classifier;
    visual::DiffOptions diff;
    bool parallel = true;
};

// --- adapter boundary ------------------------------------------------------

struct RawCommit {
    std::string hash;
    std::vector<std::string> parents;
    std::string author_name;
    std::string author_email;
    std::int64_t timestamp = 0;
    std::string message;
};

struct RawChange {
    char status = 'M';  // A, M, D, R
    std::string old_path;
    std::string path;
    std::optional<std::uint64_t> added;  // nullopt for binary content
    std::optional<std::uint64_t> deleted;
};

struct DeletedLine {
    std::size_t line_no = 0;  // 1-based, parent side
    std::string text;
};

class Repository {
public:
    virtual ~Repository() = default;

    // First-parent history of `branch`, oldest first.
    virtual std::vector<RawCommit> first_parent_log(const std::string& branch) const = 0;
    // Changes from `parent` (or the empty tree) to `commit`.
    virtual std::vector<RawChange> changes(const std::optional<std::string>& parent,
                                           const std::string& commit) const = 0;
    // Contents of "rev:path" specs; nullopt where the object does not exist.
    virtual std::vector<std::optional<std::string>> read_files(
        const std::vector<std::pair<std::string, std::string>>& specs) const = 0;
    // Blob sizes for "rev:path" specs; nullopt where the object does not exist.
    virtual std::vector<std::optional<std::uint64_t>> file_sizes(
        const std::vector<std::pair<std::string, std::string>>& specs) const = 0;
    // Commit that introduced each line of `path` as of `rev` (index 0 = line 1).
    virtual std::vector<std::string> blame(const std::string& rev, const std::string& path) const = 0;
    // Parent-side lines removed (deleted or rewritten) by `commit`.
    virtual std::vector<DeletedLine> deleted_lines(const std::string& parent, const std::string& commit,
                                                   const std::string& old_path,
                                                   const std::string& new_path) const = 0;
};

std::unique_ptr<Repository> open_git_repository(const std::filesystem::path& path);

// --- operations ------------------------------------------------------------

FileClass classify_file(std::string_view path, std::optional<std::string_view> content,
                        const ClassifierConfig& config = {});

FileTypeCombo commit_file_combo(const CommitRecord& commit) noexcept;

std::string normalize_author(std::string_view name, std::string_view email);

History walk_history(const Repository& repo, const std::string& branch, const MinerConfig& config = {});
History walk_history(const std::filesystem::path& repo_path, const std::string& branch,
                     const MinerConfig& config = {});

std::string blame_line(const Repository& repo, const std::string& path, std::size_t line_no,
                       const std::string& at_commit);

inline constexpr std::size_t kMinEligibleCommits = 200;

struct LabelFacts {
    std::size_t fix_commits = 0;
    std::size_t visual_inducing = 0;
    std::size_t textual_inducing = 0;
};

struct EligibilityReport {
    std::size_t commit_count = 0;
    bool enough_commits = false;
    bool has_visual_commit = false;
    bool has_textual_commit = false;
    std::optional<bool> has_fix_commit;
    std::optional<bool> has_visual_inducing;
    std::optional<bool> has_textual_inducing;

    bool history_eligible() const noexcept { return enough_commits && has_visual_commit && has_textual_commit; }
    bool eligible() const noexcept {
        return history_eligible() && has_fix_commit.value_or(false) &&
               has_visual_inducing.value_or(false) && has_textual_inducing.value_or(false);
    }
};

EligibilityReport check_eligibility(const History& history, const std::optional<LabelFacts>& labels = {});

// --- commits.jsonl -----------------------------------------------------------

nlohmann::ordered_json to_json(const CommitRecord& commit);
CommitRecord commit_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const EligibilityReport& report);

void write_commits_jsonl(const std::filesystem::path& path, const History& history);
History read_commits_jsonl(const std::filesystem::path& path);

}  // namespace jitvc::mining
