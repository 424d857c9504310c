#include "jitvc/repo_miner.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <sstream>

#include "jitvc/error.hpp"
#include "jitvc/io.hpp"

namespace jitvc::mining {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ChangeKind kind) noexcept {
    switch (kind) {
    case ChangeKind::Added: return "added";
    case ChangeKind::Modified: return "modified";
    case ChangeKind::Deleted: return "deleted";
    case ChangeKind::Renamed: return "renamed";
    }
    return "modified";
}

std::string_view to_string(FileClass cls) noexcept {
    switch (cls) {
    case FileClass::TextualCode: return "textual_code";
    case FileClass::VisualCode: return "visual_code";
    case FileClass::NonCode: return "non_code";
    }
    return "non_code";
}

std::string_view to_string(FileTypeCombo combo) noexcept {
    switch (combo) {
    case FileTypeCombo::OnlyNonCode: return "only-non-code";
    case FileTypeCombo::OnlyTextual: return "only-textual";
    case FileTypeCombo::OnlyVisual: return "only-visual";
    case FileTypeCombo::TextualNonCode: return "textual+non-code";
    case FileTypeCombo::VisualNonCode: return "visual+non-code";
    case FileTypeCombo::TextualVisual: return "textual+visual";
    case FileTypeCombo::TextualVisualNonCode: return "textual+visual+non-code";
    }
    return "only-non-code";
}

FileTypeCombo file_type_combo_at(std::size_t index) {
    if (index >= kFileTypeComboCount) throw Error(ErrorCode::InvalidConfig, "file type combo index out of range");
    return static_cast<FileTypeCombo>(index);
}

ChangeKind change_kind_from_string(std::string_view s) {
    for (auto k : {ChangeKind::Added, ChangeKind::Modified, ChangeKind::Deleted, ChangeKind::Renamed}) {
        if (to_string(k) == s) return k;
    }
    throw Error(ErrorCode::Io, "unknown change kind " + std::string(s));
}

FileClass file_class_from_string(std::string_view s) {
    for (auto c : {FileClass::TextualCode, FileClass::VisualCode, FileClass::NonCode}) {
        if (to_string(c) == s) return c;
    }
    throw Error(ErrorCode::Io, "unknown file class " + std::string(s));
}

std::vector<std::string> ClassifierConfig::default_textual_extensions() {
    return {
        ".c",   ".h",                                                   // C
        ".cc",  ".cpp", ".cxx", ".c++", ".hh", ".hpp", ".hxx", ".h++",  // C++
        ".cs",                                                          // C#
        ".java",                                                        //
        ".js",  ".jsx", ".mjs", ".cjs",                                 // JavaScript
        ".lua",                                                         //
        ".m",   ".mm",                                                  // Objective-C
        ".php", ".py",  ".rb",  ".swift",                               //
        ".ts",  ".tsx",                                                 // TypeScript
    };
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string extension_of(std::string_view path) {
    auto slash = path.find_last_of('/');
    auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
    auto dot = name.find_last_of('.');
    if (dot == std::string_view::npos || dot == 0) return {};
    return lower(name.substr(dot));
}

bool contains(const std::vector<std::string>& list, const std::string& ext) {
    return std::find(list.begin(), list.end(), ext) != list.end();
}

std::uint64_t count_lines(std::string_view text) {
    if (text.empty()) return 0;
    auto n = static_cast<std::uint64_t>(std::count(text.begin(), text.end(), '\n'));
    return text.back() == '\n' ? n : n + 1;
}

std::optional<visual::VisualGraph> try_parse(const std::optional<std::string>& content) {
    if (!content) return std::nullopt;
    try {
        return visual::parse_patch(*content);
    } catch (const Error&) {
        return std::nullopt;
    }
}

bool is_candidate(std::string_view path, const ClassifierConfig& config) {
    auto ext = extension_of(path);
    return contains(config.textual_extensions, ext) || contains(config.visual_extensions, ext);
}

CommitRecord mine_commit(const Repository& repo, const RawCommit& raw, const MinerConfig& config) {
    CommitRecord rec;
    rec.hash = raw.hash;
    rec.parent_hashes = raw.parents;
    rec.author_id = normalize_author(raw.author_name, raw.author_email);
    rec.timestamp = raw.timestamp;
    rec.message = raw.message;

    std::optional<std::string> parent;
    if (!raw.parents.empty()) parent = raw.parents.front();
    auto raw_changes = repo.changes(parent, raw.hash);

    // Contents are fetched only for code-extension files; everything else needs
    // a size and nothing more.
    std::vector<std::pair<std::string, std::string>> content_specs, size_specs;
    struct Slots {
        std::optional<std::size_t> old_content, new_content, new_size;
    };
    std::vector<Slots> slots(raw_changes.size());
    for (std::size_t i = 0; i < raw_changes.size(); ++i) {
        const auto& ch = raw_changes[i];
        const std::string& old_path = ch.old_path.empty() ? ch.path : ch.old_path;
        if (is_candidate(ch.path, config.classifier)) {
            if (ch.status != 'D') {
                slots[i].new_content = content_specs.size();
                content_specs.emplace_back(raw.hash, ch.path);
            }
            if (ch.status != 'A' && parent) {
                slots[i].old_content = content_specs.size();
                content_specs.emplace_back(*parent, old_path);
            }
        } else if (ch.status != 'D') {
            slots[i].new_size = size_specs.size();
            size_specs.emplace_back(raw.hash, ch.path);
        }
    }
    auto contents = repo.read_files(content_specs);
    auto sizes = repo.file_sizes(size_specs);

    for (std::size_t i = 0; i < raw_changes.size(); ++i) {
        const auto& ch = raw_changes[i];
        const auto& slot = slots[i];
        FileChange fc;
        fc.path = ch.path;
        switch (ch.status) {
        case 'A': fc.change_kind = ChangeKind::Added; break;
        case 'D': fc.change_kind = ChangeKind::Deleted; break;
        case 'R':
            fc.change_kind = ChangeKind::Renamed;
            fc.old_path = ch.old_path;
            break;
        default: fc.change_kind = ChangeKind::Modified; break;
        }

        const std::optional<std::string> none;
        const auto& new_content = slot.new_content ? contents[*slot.new_content] : none;
        const auto& old_content = slot.old_content ? contents[*slot.old_content] : none;

        std::optional<std::string_view> probe;
        if (new_content) probe = *new_content;
        else if (old_content) probe = *old_content;
        fc.file_class = classify_file(fc.path, probe, config.classifier);

        if (fc.change_kind != ChangeKind::Deleted) {
            if (new_content) fc.size_after = new_content->size();
            else if (slot.new_size && sizes[*slot.new_size]) fc.size_after = *sizes[*slot.new_size];
        }

        if (fc.file_class == FileClass::TextualCode) {
            // Binary content (no numstat counts) contributes size only.
            if (ch.added && ch.deleted) {
                fc.lines_added = *ch.added;
                fc.lines_deleted = *ch.deleted;
                if (old_content) fc.lines_before = count_lines(*old_content);
            }
        } else if (fc.file_class == FileClass::VisualCode) {
            auto old_graph = try_parse(old_content);
            auto new_graph = try_parse(new_content);
            if (old_graph || new_graph) {
                static const visual::VisualGraph kEmpty;
                fc.graph_diff = visual::diff_graphs(old_graph ? *old_graph : kEmpty,
                                                    new_graph ? *new_graph : kEmpty, config.diff);
            }
        }
        rec.changes.push_back(std::move(fc));
    }
    return rec;
}

}  // namespace

FileClass classify_file(std::string_view path, std::optional<std::string_view> content,
                        const ClassifierConfig& config) {
    auto ext = extension_of(path);
    if (contains(config.visual_extensions, ext)) {
        // Without readable content the probe cannot confirm a patch.
        if (content && visual::has_patcher_key(*content)) return FileClass::VisualCode;
        return FileClass::NonCode;
    }
    if (contains(config.textual_extensions, ext)) return FileClass::TextualCode;
    return FileClass::NonCode;
}

FileTypeCombo commit_file_combo(const CommitRecord& commit) noexcept {
    bool textual = false, visual = false, other = false;
    for (const auto& ch : commit.changes) {
        switch (ch.file_class) {
        case FileClass::TextualCode: textual = true; break;
        case FileClass::VisualCode: visual = true; break;
        case FileClass::NonCode: other = true; break;
        }
    }
    if (textual && visual) return other ? FileTypeCombo::TextualVisualNonCode : FileTypeCombo::TextualVisual;
    if (textual) return other ? FileTypeCombo::TextualNonCode : FileTypeCombo::OnlyTextual;
    if (visual) return other ? FileTypeCombo::VisualNonCode : FileTypeCombo::OnlyVisual;
    return FileTypeCombo::OnlyNonCode;
}

std::string normalize_author(std::string_view name, std::string_view email) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    email = trim(email);
    if (!email.empty()) return lower(email);
    return std::string(trim(name));
}

History walk_history(const Repository& repo, const std::string& branch, const MinerConfig& config) {
    const auto raw = repo.first_parent_log(branch);
    History history(raw.size());
    std::vector<std::exception_ptr> errors(raw.size());
    const auto n = static_cast<std::ptrdiff_t>(raw.size());

#pragma omp parallel for schedule(dynamic) if (config.parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            history[i] = mine_commit(repo, raw[i], config);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return history;
}

History walk_history(const std::filesystem::path& repo_path, const std::string& branch,
                     const MinerConfig& config) {
    auto repo = open_git_repository(repo_path);
    return walk_history(*repo, branch, config);
}

std::string blame_line(const Repository& repo, const std::string& path, std::size_t line_no,
                       const std::string& at_commit) {
    auto lines = repo.blame(at_commit, path);
    if (line_no < 1 || line_no > lines.size()) {
        throw Error(ErrorCode::LineOutOfRange,
                    path + ":" + std::to_string(line_no) + " (file has " + std::to_string(lines.size()) + " lines)");
    }
    return lines[line_no - 1];
}

EligibilityReport check_eligibility(const History& history, const std::optional<LabelFacts>& labels) {
    EligibilityReport report;
    report.commit_count = history.size();
    report.enough_commits = history.size() >= kMinEligibleCommits;
    for (const auto& c : history) {
        for (const auto& ch : c.changes) {
            if (ch.file_class == FileClass::VisualCode) report.has_visual_commit = true;
            if (ch.file_class == FileClass::TextualCode) report.has_textual_commit = true;
        }
    }
    if (labels) {
        report.has_fix_commit = labels->fix_commits > 0;
        report.has_visual_inducing = labels->visual_inducing > 0;
        report.has_textual_inducing = labels->textual_inducing > 0;
    }
    return report;
}

// --- serialization ------------------------------------------------------------

ordered_json to_json(const CommitRecord& commit) {
    ordered_json j;
    j["hash"] = commit.hash;
    j["parent_hashes"] = commit.parent_hashes;
    j["author_id"] = commit.author_id;
    j["timestamp"] = commit.timestamp;
    j["message"] = commit.message;
    ordered_json changes = ordered_json::array();
    for (const auto& ch : commit.changes) {
        ordered_json c;
        c["path"] = ch.path;
        if (!ch.old_path.empty()) c["old_path"] = ch.old_path;
        c["change_kind"] = to_string(ch.change_kind);
        c["file_class"] = to_string(ch.file_class);
        c["size_after"] = ch.size_after;
        c["lines_added"] = ch.lines_added;
        c["lines_deleted"] = ch.lines_deleted;
        c["lines_before"] = ch.lines_before;
        if (ch.graph_diff) {
            ordered_json g;
            g["added"] = ch.graph_diff->added;
            g["modified"] = ch.graph_diff->modified;
            g["deleted"] = ch.graph_diff->deleted;
            g["nodes_before"] = ch.graph_diff->nodes_before;
            c["graph_diff"] = std::move(g);
        } else {
            c["graph_diff"] = nullptr;
        }
        changes.push_back(std::move(c));
    }
    j["changes"] = std::move(changes);
    return j;
}

CommitRecord commit_from_json(const json& j) {
    try {
        CommitRecord c;
        c.hash = j.at("hash").get<std::string>();
        c.parent_hashes = j.at("parent_hashes").get<std::vector<std::string>>();
        c.author_id = j.at("author_id").get<std::string>();
        c.timestamp = j.at("timestamp").get<std::int64_t>();
        c.message = j.at("message").get<std::string>();
        for (const auto& cj : j.at("changes")) {
            FileChange ch;
            ch.path = cj.at("path").get<std::string>();
            ch.old_path = cj.value("old_path", std::string{});
            ch.change_kind = change_kind_from_string(cj.at("change_kind").get<std::string>());
            ch.file_class = file_class_from_string(cj.at("file_class").get<std::string>());
            ch.size_after = cj.at("size_after").get<std::uint64_t>();
            ch.lines_added = cj.at("lines_added").get<std::uint64_t>();
            ch.lines_deleted = cj.at("lines_deleted").get<std::uint64_t>();
            ch.lines_before = cj.value("lines_before", std::uint64_t{0});
            if (auto g = cj.find("graph_diff"); g != cj.end() && !g->is_null()) {
                visual::GraphDiff d;
                d.added = g->at("added").get<std::set<std::string>>();
                d.modified = g->at("modified").get<std::set<std::string>>();
                d.deleted = g->at("deleted").get<std::set<std::string>>();
                d.nodes_before = g->at("nodes_before").get<std::size_t>();
                ch.graph_diff = std::move(d);
            }
            c.changes.push_back(std::move(ch));
        }
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, std::string("bad commit record: ") + e.what());
    }
}

ordered_json to_json(const EligibilityReport& report) {
    ordered_json j;
    j["commit_count"] = report.commit_count;
    j["enough_commits"] = report.enough_commits;
    j["has_visual_commit"] = report.has_visual_commit;
    j["has_textual_commit"] = report.has_textual_commit;
    auto opt = [](const std::optional<bool>& b) { return b ? ordered_json(*b) : ordered_json(nullptr); };
    j["has_fix_commit"] = opt(report.has_fix_commit);
    j["has_visual_inducing"] = opt(report.has_visual_inducing);
    j["has_textual_inducing"] = opt(report.has_textual_inducing);
    j["eligible"] = report.eligible();
    return j;
}

void write_commits_jsonl(const std::filesystem::path& path, const History& history) {
    std::string out;
    for (const auto& c : history) {
        out += to_json(c).dump();
        out += '\n';
    }
    io::write_text(path, out);
}

History read_commits_jsonl(const std::filesystem::path& path) {
    History history;
    for (const auto& line : io::split_lines(io::read_text(path))) {
        if (line.empty()) continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error(ErrorCode::Io, "malformed line in " + path.string());
        history.push_back(commit_from_json(j));
    }
    return history;
}

}  // namespace jitvc::mining
