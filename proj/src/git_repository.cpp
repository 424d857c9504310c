#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>

#include "jitvc/error.hpp"
#include "jitvc/process.hpp"
#include "jitvc/repo_miner.hpp"

namespace jitvc::mining {

namespace {

bool is_hex_id(std::string_view s) {
    return (s.size() == 40 || s.size() == 64) &&
           std::all_of(s.begin(), s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

std::uint64_t parse_u64(std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{}) throw Error(ErrorCode::Vcs, "expected a number, got '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

class GitRepository final : public Repository {
public:
    explicit GitRepository(std::filesystem::path root) : root_(std::move(root)) {}

    std::vector<RawCommit> first_parent_log(const std::string& branch) const override {
        auto head = run({"rev-parse", "--verify", "--quiet", branch + "^{commit}"});
        if (head.exit_code != 0) {
            auto any = run({"rev-parse", "--verify", "--quiet", "HEAD^{commit}"});
            auto refs = run({"for-each-ref", "--count=1", "refs/heads"});
            if (any.exit_code != 0 && refs.out.empty()) throw Error(ErrorCode::EmptyHistory, root_.string());
            throw Error(ErrorCode::BranchNotFound, branch);
        }
        auto log = checked({"log", "--first-parent", "--reverse", "--no-color",
                            "--format=%H%x1f%P%x1f%an%x1f%ae%x1f%at%x1f%B%x1e", branch});
        std::vector<RawCommit> commits;
        for (auto record : split(log, '\x1e')) {
            while (!record.empty() && (record.front() == '\n' || record.front() == '\r')) record.remove_prefix(1);
            if (record.empty()) continue;
            auto fields = split(record, '\x1f');
            if (fields.size() < 6) throw Error(ErrorCode::Vcs, "unexpected git log record");
            RawCommit c;
            c.hash = std::string(fields[0]);
            for (auto p : split(fields[1], ' ')) {
                if (!p.empty()) c.parents.emplace_back(p);
            }
            c.author_name = std::string(fields[2]);
            c.author_email = std::string(fields[3]);
            c.timestamp = static_cast<std::int64_t>(parse_u64(fields[4]));
            std::string_view msg = fields[5];
            while (!msg.empty() && (msg.back() == '\n' || msg.back() == ' ')) msg.remove_suffix(1);
            c.message = std::string(msg);
            commits.push_back(std::move(c));
        }
        if (commits.empty()) throw Error(ErrorCode::EmptyHistory, branch);
        return commits;
    }

    std::vector<RawChange> changes(const std::optional<std::string>& parent,
                                   const std::string& commit) const override {
        std::vector<std::string> args = {"diff-tree", "-r", "-z", "--no-commit-id", "-M", "--raw", "--numstat"};
        if (parent) {
            args.push_back(*parent);
        } else {
            args.push_back("--root");
        }
        args.push_back(commit);
        auto out = checked(args);

        auto tokens = split(out, '\0');
        std::vector<RawChange> changes;
        std::vector<bool> gitlink;
        std::map<std::string, std::pair<std::optional<std::uint64_t>, std::optional<std::uint64_t>>> stats;
        std::size_t i = 0;
        while (i < tokens.size()) {
            std::string_view tok = tokens[i];
            if (tok.empty()) {
                ++i;
                continue;
            }
            if (tok.front() == ':') {
                auto meta = split(tok.substr(1), ' ');
                if (meta.size() < 5) throw Error(ErrorCode::Vcs, "bad raw diff entry");
                RawChange ch;
                char status = meta[4].empty() ? 'M' : meta[4].front();
                bool link = meta[0] == "160000" || meta[1] == "160000";
                if (status == 'R' || status == 'C') {
                    if (i + 2 >= tokens.size()) throw Error(ErrorCode::Vcs, "truncated rename entry");
                    ch.old_path = std::string(tokens[i + 1]);
                    ch.path = std::string(tokens[i + 2]);
                    ch.status = status == 'R' ? 'R' : 'A';
                    if (status == 'C') ch.old_path.clear();
                    i += 3;
                } else {
                    ch.path = std::string(tokens[i + 1]);
                    ch.status = (status == 'A' || status == 'D') ? status : 'M';
                    i += 2;
                }
                changes.push_back(std::move(ch));
                gitlink.push_back(link);
                continue;
            }
            // numstat: "added\tdeleted\tpath" or "added\tdeleted\t" followed by old, new.
            auto cols = split(tok, '\t');
            if (cols.size() != 3) throw Error(ErrorCode::Vcs, "bad numstat entry");
            std::optional<std::uint64_t> added, deleted;
            if (cols[0] != "-") added = parse_u64(cols[0]);
            if (cols[1] != "-") deleted = parse_u64(cols[1]);
            std::string path;
            if (cols[2].empty()) {
                if (i + 2 >= tokens.size()) throw Error(ErrorCode::Vcs, "truncated numstat rename");
                path = std::string(tokens[i + 2]);
                i += 3;
            } else {
                path = std::string(cols[2]);
                i += 1;
            }
            stats[path] = {added, deleted};
        }

        std::vector<RawChange> result;
        for (std::size_t k = 0; k < changes.size(); ++k) {
            if (gitlink[k]) continue;
            auto& ch = changes[k];
            if (auto it = stats.find(ch.path); it != stats.end()) {
                ch.added = it->second.first;
                ch.deleted = it->second.second;
            }
            result.push_back(std::move(ch));
        }
        std::sort(result.begin(), result.end(), [](const RawChange& a, const RawChange& b) { return a.path < b.path; });
        return result;
    }

    std::vector<std::optional<std::string>> read_files(
        const std::vector<std::pair<std::string, std::string>>& specs) const override {
        std::vector<std::optional<std::string>> out(specs.size());
        if (specs.empty()) return out;
        std::string input;
        for (const auto& [rev, path] : specs) input += rev + ":" + path + "\n";
        auto res = run({"cat-file", "--batch"}, input);
        if (res.exit_code != 0) throw Error(ErrorCode::Vcs, "git cat-file failed: " + res.err);

        std::string_view data = res.out;
        std::size_t pos = 0;
        for (std::size_t k = 0; k < specs.size(); ++k) {
            auto eol = data.find('\n', pos);
            if (eol == std::string_view::npos) throw Error(ErrorCode::Vcs, "truncated cat-file output");
            std::string_view header = data.substr(pos, eol - pos);
            pos = eol + 1;
            auto fields = split(header, ' ');
            if (fields.size() == 3 && is_hex_id(fields[0])) {
                auto size = parse_u64(fields[2]);
                if (fields[1] == "blob") out[k] = std::string(data.substr(pos, size));
                pos += size + 1;
            }
        }
        return out;
    }

    std::vector<std::optional<std::uint64_t>> file_sizes(
        const std::vector<std::pair<std::string, std::string>>& specs) const override {
        std::vector<std::optional<std::uint64_t>> out(specs.size());
        if (specs.empty()) return out;
        std::string input;
        for (const auto& [rev, path] : specs) input += rev + ":" + path + "\n";
        auto res = run({"cat-file", "--batch-check"}, input);
        if (res.exit_code != 0) throw Error(ErrorCode::Vcs, "git cat-file failed: " + res.err);
        auto lines = split(res.out, '\n');
        for (std::size_t k = 0; k < specs.size() && k < lines.size(); ++k) {
            auto fields = split(lines[k], ' ');
            if (fields.size() == 3 && is_hex_id(fields[0]) && fields[1] == "blob") out[k] = parse_u64(fields[2]);
        }
        return out;
    }

    std::vector<std::string> blame(const std::string& rev, const std::string& path) const override {
        auto res = run({"blame", "--porcelain", "--first-parent", rev, "--", path});
        if (res.exit_code != 0) {
            if (res.err.find("no such path") != std::string::npos || res.err.find("no such ref") != std::string::npos) {
                throw Error(ErrorCode::PathNotFound, path + " at " + rev);
            }
            throw Error(ErrorCode::Vcs, "git blame failed: " + res.err);
        }
        std::vector<std::string> lines;
        std::string_view data = res.out;
        std::size_t pos = 0;
        while (pos < data.size()) {
            auto eol = data.find('\n', pos);
            if (eol == std::string_view::npos) eol = data.size();
            std::string_view line = data.substr(pos, eol - pos);
            pos = eol + 1;
            if (line.empty() || line.front() == '\t') continue;
            auto fields = split(line, ' ');
            if (fields.size() >= 3 && is_hex_id(fields[0])) {
                auto final_line = parse_u64(fields[2]);
                if (lines.size() < final_line) lines.resize(final_line);
                lines[final_line - 1] = std::string(fields[0]);
            }
        }
        return lines;
    }

    std::vector<DeletedLine> deleted_lines(const std::string& parent, const std::string& commit,
                                           const std::string& old_path, const std::string& new_path) const override {
        std::vector<std::string> args = {"diff", "-U0", "--no-color", "--no-ext-diff", "--src-prefix=a/", "--dst-prefix=b/", "-M", parent, commit, "--", old_path};
        if (new_path != old_path) args.push_back(new_path);
        auto out = checked(args);

        std::vector<DeletedLine> deleted;
        std::size_t old_line = 0, old_left = 0, new_left = 0;
        bool in_diff_for_old = false;
        for (const auto& line : split(out, '\n')) {
            if (old_left == 0 && new_left == 0) {
                if (line.starts_with("diff --git ")) {
                    in_diff_for_old = false;
                    continue;
                }
                if (line.starts_with("--- ")) {
                    in_diff_for_old = line == "--- a/" + old_path;
                    continue;
                }
                if (line.starts_with("@@ ")) {
                    // @@ -start[,count] +start[,count] @@
                    auto minus = line.find('-');
                    auto plus = line.find(" +", minus);
                    auto end = line.find(" @@", plus);
                    auto parse_range = [](std::string_view r, std::size_t& start, std::size_t& count) {
                        auto comma = r.find(',');
                        start = parse_u64(r.substr(0, comma));
                        count = comma == std::string_view::npos ? 1 : parse_u64(r.substr(comma + 1));
                    };
                    std::size_t new_start = 0;
                    parse_range(line.substr(minus + 1, plus - minus - 1), old_line, old_left);
                    parse_range(line.substr(plus + 2, end - plus - 2), new_start, new_left);
                }
                continue;
            }
            if (line.starts_with("\\")) continue;
            if (line.starts_with("-") && old_left > 0) {
                if (in_diff_for_old) deleted.push_back({old_line, std::string(line.substr(1))});
                ++old_line;
                --old_left;
            } else if (line.starts_with("+") && new_left > 0) {
                --new_left;
            }
        }
        return deleted;
    }

private:
    ProcessResult run(std::vector<std::string> args, const std::string& input = {}) const {
        args.insert(args.begin(), {"git", "-c", "core.quotepath=off", "-c", "color.ui=never"});
        ProcessOptions options;
        options.cwd = root_;
        options.input = input;
        options.env = {{"GIT_PAGER", "cat"}, {"LC_ALL", "C"}};
        return run_process(args, options);
    }

    std::string checked(const std::vector<std::string>& args) const {
        auto res = run(args);
        if (res.exit_code != 0) throw Error(ErrorCode::Vcs, "git " + args.front() + " failed: " + res.err);
        return std::move(res.out);
    }

    std::filesystem::path root_;
};

}  // namespace

std::unique_ptr<Repository> open_git_repository(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_directory(path, ec)) throw Error(ErrorCode::RepoNotFound, path.string());
    ProcessOptions options;
    options.cwd = path;
    auto res = run_process({"git", "rev-parse", "--show-toplevel"}, options);
    if (res.exit_code != 0) throw Error(ErrorCode::RepoNotFound, path.string());
    return std::make_unique<GitRepository>(std::filesystem::absolute(path));
}

}  // namespace jitvc::mining
