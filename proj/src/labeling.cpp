#include "jitvc/labeling.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <regex>
#include <unordered_map>

#include "jitvc/error.hpp"
#include "jitvc/io.hpp"

namespace jitvc::labeling {

using mining::ChangeKind;
using mining::CommitRecord;
using mining::FileClass;
using nlohmann::json;
using nlohmann::ordered_json;

FixStrategy fix_strategy_from_string(std::string_view name) {
    if (name == "keywords") return FixStrategy::Keywords;
    if (name == "issue-links") return FixStrategy::IssueLinks;
    throw Error(ErrorCode::UnknownStrategy, std::string(name));
}

std::string_view to_string(FixStrategy strategy) noexcept {
    return strategy == FixStrategy::Keywords ? "keywords" : "issue-links";
}

ChangeDepth change_depth_from_string(std::string_view name) {
    if (name == "max") return ChangeDepth::Max;
    if (name == "most-recent") return ChangeDepth::MostRecent;
    throw Error(ErrorCode::UnknownStrategy, std::string(name));
}

std::string_view to_string(ChangeDepth depth) noexcept {
    return depth == ChangeDepth::Max ? "max" : "most-recent";
}

std::vector<std::string> default_defect_keywords() {
    return {"fix", "bug", "defect", "error", "fail", "patch", "wrong"};
}

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::unordered_map<std::string, std::size_t> index_by_hash(const History& history) {
    std::unordered_map<std::string, std::size_t> idx;
    idx.reserve(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) idx.emplace(history[i].hash, i);
    return idx;
}

const CommitRecord& find_commit(const History& history, const std::unordered_map<std::string, std::size_t>& idx,
                                const std::string& hash, std::size_t* position = nullptr) {
    auto it = idx.find(hash);
    if (it == idx.end()) throw Error(ErrorCode::InvalidConfig, "commit not in history: " + hash);
    if (position) *position = it->second;
    return history[it->second];
}

std::vector<std::string> comment_prefixes(std::string_view path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string_view::npos ? std::string{} : lower(path.substr(dot));
    if (ext == ".py" || ext == ".rb") return {"#"};
    if (ext == ".lua") return {"--"};
    if (ext == ".php") return {"//", "#"};
    return {"//"};
}

void add_evidence(Attribution& out, const std::string& inducing, Evidence ev) {
    auto& list = out[inducing];
    if (std::find(list.begin(), list.end(), ev) == list.end()) list.push_back(std::move(ev));
}

}  // namespace

bool matches_keyword(std::string_view message, const std::vector<std::string>& keywords) {
    const std::string text = lower(message);
    for (const auto& raw : keywords) {
        const std::string kw = lower(raw);
        if (kw.empty()) continue;
        for (auto pos = text.find(kw); pos != std::string::npos; pos = text.find(kw, pos + 1)) {
            bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
            auto end = pos + kw.size();
            bool right_ok = end == text.size() || !is_word_char(text[end]);
            if (left_ok && right_ok) return true;
        }
    }
    return false;
}

std::vector<IssueRecord> read_issues_csv(const std::filesystem::path& path) {
    std::vector<IssueRecord> issues;
    bool first = true;
    for (const auto& line : io::split_lines(io::read_text(path))) {
        if (trim(line).empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            auto comma = line.find(',', start);
            cols.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (first) {
            first = false;
            if (lower(cols[0]).find("issue") != std::string::npos) continue;
        }
        if (cols.size() < 2) throw Error(ErrorCode::Io, "issues.csv row needs issue-key,is_defect[,fix-commit]");
        IssueRecord rec;
        rec.key = cols[0];
        auto flag = lower(cols[1]);
        rec.is_defect = flag == "1" || flag == "true" || flag == "yes";
        if (cols.size() > 2) rec.fix_commit = cols[2];
        issues.push_back(std::move(rec));
    }
    return issues;
}

std::set<std::string> identify_fix_commits(const History& history, const FixConfig& config) {
    std::set<std::string> fixes;
    if (config.strategy == FixStrategy::Keywords) {
        for (const auto& c : history) {
            if (matches_keyword(c.message, config.keywords)) fixes.insert(c.hash);
        }
        return fixes;
    }

    std::map<std::string, bool> defect_keys;
    std::set<std::string> linked_hashes;
    for (const auto& issue : config.issues) {
        defect_keys[issue.key] = defect_keys[issue.key] || issue.is_defect;
        if (issue.is_defect && !issue.fix_commit.empty()) linked_hashes.insert(issue.fix_commit);
    }
    const std::regex pattern(config.issue_pattern);
    for (const auto& c : history) {
        bool fix = linked_hashes.contains(c.hash);
        for (auto it = std::sregex_iterator(c.message.begin(), c.message.end(), pattern);
             !fix && it != std::sregex_iterator(); ++it) {
            auto found = defect_keys.find(it->str());
            fix = found != defect_keys.end() && found->second;
        }
        if (fix) fixes.insert(c.hash);
    }
    return fixes;
}

bool is_comment_or_blank(std::string_view path, std::string_view line) {
    auto text = trim(line);
    if (text.empty()) return true;
    for (const auto& prefix : comment_prefixes(path)) {
        if (text.starts_with(prefix)) return true;
    }
    return false;
}

Attribution szz_textual(const Repository& repo, const History& history, const std::string& fix_commit) {
    const auto idx = index_by_hash(history);
    const auto& fix = find_commit(history, idx, fix_commit);
    Attribution out;
    if (fix.parent_hashes.empty()) return out;
    const std::string& parent = fix.parent_hashes.front();

    for (const auto& ch : fix.changes) {
        if (ch.file_class != FileClass::TextualCode || ch.change_kind == ChangeKind::Added) continue;
        const std::string& old_path = ch.previous_path();
        auto removed = repo.deleted_lines(parent, fix.hash, old_path, ch.path);
        std::erase_if(removed, [&](const mining::DeletedLine& l) { return is_comment_or_blank(old_path, l.text); });
        if (removed.empty()) continue;

        const auto blame = repo.blame(parent, old_path);
        for (const auto& line : removed) {
            if (line.line_no < 1 || line.line_no > blame.size()) continue;
            const std::string& origin = blame[line.line_no - 1];
            auto it = idx.find(origin);
            if (it == idx.end() || origin == fix.hash) continue;
            if (history[it->second].timestamp >= fix.timestamp) continue;
            add_evidence(out, origin,
                         {fix.hash, Evidence::Kind::Line, old_path, "L" + std::to_string(line.line_no)});
        }
    }
    return out;
}

Attribution szz_vc(const History& history, const std::string& fix_commit, ChangeDepth depth,
                   std::vector<std::string>* skipped) {
    const auto idx = index_by_hash(history);
    std::size_t fix_pos = 0;
    const auto& fix = find_commit(history, idx, fix_commit, &fix_pos);
    Attribution out;

    for (const auto& ch : fix.changes) {
        if (ch.file_class != FileClass::VisualCode) continue;
        if (!ch.graph_diff) {
            if (skipped) skipped->push_back(fix.hash + ":" + ch.path);
            continue;
        }
        std::set<std::string> targets = ch.graph_diff->modified;
        targets.insert(ch.graph_diff->deleted.begin(), ch.graph_diff->deleted.end());

        for (const auto& node : targets) {
            std::string path = ch.previous_path();
            for (std::size_t j = fix_pos; j-- > 0;) {
                const auto& prior = history[j];
                auto it = std::find_if(prior.changes.begin(), prior.changes.end(),
                                       [&](const mining::FileChange& c) { return c.path == path; });
                if (it == prior.changes.end()) continue;
                if (it->change_kind == ChangeKind::Deleted) break;

                bool added = it->graph_diff && it->graph_diff->added.contains(node);
                bool touched = added || (it->graph_diff && it->graph_diff->modified.contains(node));
                if (touched && prior.timestamp < fix.timestamp) {
                    add_evidence(out, prior.hash, {fix.hash, Evidence::Kind::Node, ch.path, node});
                    if (depth == ChangeDepth::MostRecent) break;
                }
                // The node's history starts where it was added, as does the file's.
                if (added || it->change_kind == ChangeKind::Added) break;
                if (it->change_kind == ChangeKind::Renamed) path = it->old_path;
            }
        }
    }
    return out;
}

std::set<std::string> inducing_set(const Attribution& attribution) {
    std::set<std::string> out;
    for (const auto& [hash, _] : attribution) out.insert(hash);
    return out;
}

mining::LabelFacts LabelSet::facts() const {
    return {fix_commits.size(), visual_inducing.size(), textual_inducing.size()};
}

LabelSet label_commits(const Repository& repo, const History& history, const std::set<std::string>& fixes,
                       const SzzConfig& config) {
    const std::vector<std::string> ordered(fixes.begin(), fixes.end());
    const auto n = static_cast<std::ptrdiff_t>(ordered.size());
    std::vector<Attribution> textual(ordered.size()), visual(ordered.size());
    std::vector<std::vector<std::string>> skipped(ordered.size());
    std::vector<std::exception_ptr> errors(ordered.size());

#pragma omp parallel for schedule(dynamic) if (config.parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            textual[i] = szz_textual(repo, history, ordered[i]);
            visual[i] = szz_vc(history, ordered[i], config.depth, &skipped[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    LabelSet labels;
    labels.fix_commits = fixes;
    auto merge = [&](const Attribution& a, std::set<std::string>& kind_set) {
        for (const auto& [hash, evidence] : a) {
            labels.inducing_commits.insert(hash);
            kind_set.insert(hash);
            auto& list = labels.provenance[hash];
            list.insert(list.end(), evidence.begin(), evidence.end());
        }
    };
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        merge(textual[i], labels.textual_inducing);
        merge(visual[i], labels.visual_inducing);
        labels.skipped.insert(labels.skipped.end(), skipped[i].begin(), skipped[i].end());
    }
    for (auto& [_, list] : labels.provenance) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return labels;
}

void write_labels_jsonl(const std::filesystem::path& path, const History& history, const LabelSet& labels) {
    std::string out;
    for (const auto& c : history) {
        ordered_json j;
        j["hash"] = c.hash;
        j["is_fix"] = labels.is_fix(c.hash);
        j["is_defect_inducing"] = labels.is_inducing(c.hash);
        ordered_json prov = ordered_json::array();
        if (auto it = labels.provenance.find(c.hash); it != labels.provenance.end()) {
            for (const auto& ev : it->second) {
                ordered_json e;
                e["fix_commit"] = ev.fix_commit;
                e["kind"] = ev.kind == Evidence::Kind::Line ? "line" : "node";
                e["path"] = ev.path;
                e["ref"] = ev.reference;
                prov.push_back(std::move(e));
            }
        }
        j["provenance"] = std::move(prov);
        out += j.dump();
        out += '\n';
    }
    io::write_text(path, out);
}

LabelSet read_labels_jsonl(const std::filesystem::path& path) {
    LabelSet labels;
    for (const auto& line : io::split_lines(io::read_text(path))) {
        if (line.empty()) continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error(ErrorCode::Io, "malformed line in " + path.string());
        try {
            auto hash = j.at("hash").get<std::string>();
            if (j.at("is_fix").get<bool>()) labels.fix_commits.insert(hash);
            if (j.at("is_defect_inducing").get<bool>()) labels.inducing_commits.insert(hash);
            for (const auto& e : j.at("provenance")) {
                Evidence ev;
                ev.fix_commit = e.at("fix_commit").get<std::string>();
                ev.kind = e.at("kind").get<std::string>() == "line" ? Evidence::Kind::Line : Evidence::Kind::Node;
                ev.path = e.at("path").get<std::string>();
                ev.reference = e.at("ref").get<std::string>();
                (ev.kind == Evidence::Kind::Line ? labels.textual_inducing : labels.visual_inducing).insert(hash);
                labels.provenance[hash].push_back(std::move(ev));
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Io, std::string("bad label record: ") + e.what());
        }
    }
    return labels;
}

}  // namespace jitvc::labeling
