#pragma once

// Deterministic git repositories for tests, benchmarks and the bundled
// fixture. Repositories are written with `git fast-import`, so identical
// inputs always give identical commit hashes.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace jitvc::fixture {

struct FileOp {
    enum class Kind { Write, Delete, Rename } kind = Kind::Write;
    std::string path;
    std::string content;   // Write
    std::string from;      // Rename source

    static FileOp write(std::string path, std::string content);
    static FileOp remove(std::string path);
    static FileOp rename(std::string from, std::string to);
};

struct Author {
    std::string name;
    std::string email;
};

// Linear history on one branch; commit i gets timestamp base + i * step.
class RepoBuilder {
public:
    explicit RepoBuilder(std::int64_t base_timestamp = 1'600'000'000, std::int64_t step = 3600);

    // Returns the commit index.
    std::size_t commit(std::string message, std::vector<FileOp> ops, std::size_t author = 0);
    std::size_t size() const { return commits_.size(); }
    std::vector<Author>& authors() { return authors_; }

    // Creates `dir` (which must not exist or be empty) and returns one hash
    // per commit index.
    std::vector<std::string> build(const std::filesystem::path& dir, const std::string& branch = "main") const;

    std::string fast_import_stream(const std::string& branch) const;

private:
    struct Planned {
        std::string message;
        std::vector<FileOp> ops;
        std::size_t author;
    };
    std::int64_t base_;
    std::int64_t step_;
    std::vector<Author> authors_;
    std::vector<Planned> commits_;
};

// --- content helpers -------------------------------------------------------------------

struct Box {
    std::string id;
    std::string maxclass = "newobj";
    std::string text;
    std::vector<double> rect = {0, 0, 80, 22};
    std::optional<std::vector<Box>> subpatch;  // "p" boxes carry a nested patcher
};

struct Patchline {
    std::string source;
    int source_port = 0;
    std::string destination;
    int destination_port = 0;
};

std::string patch_text(const std::vector<Box>& boxes, const std::vector<Patchline>& lines = {});

// --- SZZ scenario fixture ---------------------------------------------------------------------

struct ExpectedFix {
    std::string fix;
    std::set<std::string> inducing;  // under max change-depth
    std::set<std::string> inducing_most_recent;
};

struct ScenarioTruth {
    std::string name;
    std::string kind;  // textual | visual | mixed
    std::vector<ExpectedFix> fixes;
};

struct FixtureOptions {
    std::size_t total_commits = 240;  // seed commit, scenario commits and filler
    std::uint64_t seed = 7;
};

struct Fixture {
    std::filesystem::path path;
    std::vector<std::string> hashes;  // chronological
    std::vector<ScenarioTruth> scenarios;

    std::set<std::string> fix_commits() const;
    std::set<std::string> inducing_commits() const;
};

// Planted SZZ scenarios on disjoint files, interleaved with filler commits
// whose messages carry no defect keyword.
Fixture build_fixture_repo(const std::filesystem::path& dir, const FixtureOptions& options = {});

// Filler-only repository with `commits` commits (used for ineligibility and
// benchmark inputs).
std::vector<std::string> build_filler_repo(const std::filesystem::path& dir, std::size_t commits,
                                           std::uint64_t seed = 11);

}  // namespace jitvc::fixture
