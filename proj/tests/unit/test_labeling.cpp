#include <doctest.h>

#include "fixture_repo.hpp"
#include "jitvc/error.hpp"
#include "jitvc/io.hpp"
#include "jitvc/labeling.hpp"
#include "support/test_support.hpp"

using namespace jitvc;
using namespace jitvc::labeling;
using fixture::Box;
using fixture::FileOp;
using fixture::RepoBuilder;
using testing::TempDir;

namespace {

struct Built {
    std::unique_ptr<Repository> repo;
    History history;
    std::vector<std::string> hashes;
};

Built build(const RepoBuilder& b, const std::filesystem::path& dir) {
    Built out;
    out.hashes = b.build(dir);
    out.repo = mining::open_git_repository(dir);
    out.history = mining::walk_history(*out.repo, "HEAD");
    return out;
}

std::string patch(const std::vector<std::pair<std::string, std::string>>& boxes) {
    std::vector<Box> v;
    for (const auto& [id, text] : boxes) v.push_back(Box{.id = id, .text = text});
    return fixture::patch_text(v);
}

std::set<std::string> hashes_at(const Built& b, std::initializer_list<std::size_t> idx) {
    std::set<std::string> out;
    for (auto i : idx) out.insert(b.hashes[i]);
    return out;
}

}  // namespace

TEST_SUITE("labeling") {

TEST_CASE("keyword matching is whole-word and case-insensitive") {
    const auto kw = default_defect_keywords();
    CHECK(matches_keyword("fix crash when loading patch", kw));
    CHECK(matches_keyword("Fix: null deref", kw));
    CHECK(matches_keyword("resolve BUG in mixer", kw));
    CHECK_FALSE(matches_keyword("add new feature", kw));
    CHECK_FALSE(matches_keyword("prefix rename", kw));
    CHECK_FALSE(matches_keyword("fixture update; debugger cleanup", kw));
    CHECK(matches_keyword("custom words", {"words"}));
}

TEST_CASE("identify_fix_commits: keywords and issue links") {
    History h(4);
    h[0] = {.hash = "a", .message = "ABC-1 tidy"};
    h[1] = {.hash = "b", .message = "fix the mixer"};
    h[2] = {.hash = "c", .message = "ABC-2 feature work"};
    h[3] = {.hash = "d", .message = "plain"};
    CHECK(identify_fix_commits(h, {}) == std::set<std::string>{"b"});

    FixConfig issues;
    issues.strategy = FixStrategy::IssueLinks;
    issues.issues = {{"ABC-1", true, ""}, {"ABC-2", false, ""}, {"ABC-9", true, "d"}};
    CHECK(identify_fix_commits(h, issues) == std::set<std::string>{"a", "d"});

    CHECK_THROWS_AS(fix_strategy_from_string("astrology"), Error);
    try {
        fix_strategy_from_string("astrology");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownStrategy);
    }
    CHECK(fix_strategy_from_string("issue-links") == FixStrategy::IssueLinks);
}

TEST_CASE("read_issues_csv with and without a header") {
    TempDir tmp("issues");
    io::write_text(tmp / "a.csv", "issue_key,is_defect,fix_commit\nABC-1,true,abc\nABC-2,0,\n");
    auto a = read_issues_csv(tmp / "a.csv");
    REQUIRE(a.size() == 2);
    CHECK(a[0].key == "ABC-1");
    CHECK(a[0].is_defect);
    CHECK(a[0].fix_commit == "abc");
    CHECK_FALSE(a[1].is_defect);
    io::write_text(tmp / "b.csv", "X-1,1\n");
    CHECK(read_issues_csv(tmp / "b.csv").size() == 1);
}

TEST_CASE("comment and blank filtering") {
    CHECK(is_comment_or_blank("a.py", "   "));
    CHECK(is_comment_or_blank("a.py", "  # note"));
    CHECK_FALSE(is_comment_or_blank("a.py", "x = 1  # note"));
    CHECK(is_comment_or_blank("a.cpp", "// note"));
    CHECK(is_comment_or_blank("a.lua", "-- note"));
    CHECK_FALSE(is_comment_or_blank("a.lua", "// not lua"));
}

TEST_CASE("szz_textual: deleted buggy line traces to its author commit") {
    TempDir tmp("szzt");
    RepoBuilder b;
    b.commit("A add logic", {FileOp::write("m.py", "def f():\n    return 1 / 0\n")});
    b.commit("B unrelated", {FileOp::write("other.py", "pass\n")});
    b.commit("C fix division", {FileOp::write("m.py", "def f():\n    return 1\n")});
    auto built = build(b, tmp.path() / "repo");
    auto attr = szz_textual(*built.repo, built.history, built.hashes[2]);
    CHECK(inducing_set(attr) == hashes_at(built, {0}));
    REQUIRE(attr.at(built.hashes[0]).size() == 1);
    CHECK(attr.at(built.hashes[0])[0].reference == "L2");
}

TEST_CASE("szz_textual: a pure addition blames nothing") {
    TempDir tmp("szzadd");
    RepoBuilder b;
    b.commit("A", {FileOp::write("m.py", "a = 1\n")});
    b.commit("fix by adding a guard", {FileOp::write("m.py", "a = 1\nassert a\n")});
    auto built = build(b, tmp.path() / "repo");
    CHECK(szz_textual(*built.repo, built.history, built.hashes[1]).empty());
}

TEST_CASE("szz_textual: same author one commit earlier, comments ignored") {
    TempDir tmp("szzsame");
    RepoBuilder b;
    b.commit("A", {FileOp::write("m.c", "int a;\n// old note\nint b;\n")}, 0);
    b.commit("B", {FileOp::write("m.c", "int a;\n// old note\nint b = 2;\n")}, 1);
    b.commit("fix b", {FileOp::write("m.c", "int a;\nint b = 3;\n")}, 1);
    auto built = build(b, tmp.path() / "repo");
    CHECK(inducing_set(szz_textual(*built.repo, built.history, built.hashes[2])) == hashes_at(built, {1}));
}

TEST_CASE("szz_vc: full chain under max depth, latest under most-recent") {
    TempDir tmp("szzvc");
    RepoBuilder b;
    b.commit("start", {FileOp::write("p.maxpat", patch({{"obj-1", "metro 100"}, {"obj-2", "print"}}))});
    b.commit("A add gain", {FileOp::write("p.maxpat", patch({{"obj-1", "metro 100"}, {"obj-2", "print"}, {"obj-3", "*~ 2"}}))});
    b.commit("B tweak gain", {FileOp::write("p.maxpat", patch({{"obj-1", "metro 100"}, {"obj-2", "print"}, {"obj-3", "*~ 3"}}))});
    b.commit("C fix clipping", {FileOp::write("p.maxpat", patch({{"obj-1", "metro 100"}, {"obj-2", "print"}}))});
    auto built = build(b, tmp.path() / "repo");
    CHECK(inducing_set(szz_vc(built.history, built.hashes[3])) == hashes_at(built, {1, 2}));
    CHECK(inducing_set(szz_vc(built.history, built.hashes[3], ChangeDepth::MostRecent)) == hashes_at(built, {2}));
}

TEST_CASE("szz_vc: add-only fix and immediate predecessor") {
    TempDir tmp("szzvc2");
    RepoBuilder b;
    b.commit("start", {FileOp::write("p.maxpat", patch({{"obj-1", "a"}}))});
    b.commit("fix by adding", {FileOp::write("p.maxpat", patch({{"obj-1", "a"}, {"obj-2", "b"}}))});
    b.commit("fix obj-2 text", {FileOp::write("p.maxpat", patch({{"obj-1", "a"}, {"obj-2", "c"}}))});
    auto built = build(b, tmp.path() / "repo");
    CHECK(szz_vc(built.history, built.hashes[1]).empty());
    CHECK(inducing_set(szz_vc(built.history, built.hashes[2])) == hashes_at(built, {1}));
}

TEST_CASE("szz_vc: renamed patch keeps its node history") {
    TempDir tmp("szzvcmv");
    RepoBuilder b;
    b.commit("start", {FileOp::write("a.maxpat", patch({{"obj-1", "x"}}))});
    b.commit("move", {FileOp::rename("a.maxpat", "b.maxpat")});
    b.commit("fix x", {FileOp::write("b.maxpat", patch({{"obj-1", "y"}}))});
    auto built = build(b, tmp.path() / "repo");
    CHECK(inducing_set(szz_vc(built.history, built.hashes[2])) == hashes_at(built, {0}));
}

TEST_CASE("label_commits: one textual and one visual defect, plus a fix that induces") {
    TempDir tmp("label");
    RepoBuilder b;
    b.commit("init", {FileOp::write("a.py", "x = 1\ny = 2\n"), FileOp::write("p.maxpat", patch({{"obj-1", "a"}}))});
    b.commit("plant text slip", {FileOp::write("a.py", "x = 1\ny = 0\n")});                          // 1
    b.commit("plant node slip", {FileOp::write("p.maxpat", patch({{"obj-1", "a"}, {"obj-2", "bad"}}))});  // 2
    b.commit("docs", {FileOp::write("README.md", "hello\n")});                                        // 3
    b.commit("fix y and add z", {FileOp::write("a.py", "x = 1\ny = 2\nz = 0\n")});                     // 4
    b.commit("fix node", {FileOp::write("p.maxpat", patch({{"obj-1", "a"}, {"obj-2", "good"}}))});     // 5
    b.commit("fix z", {FileOp::write("a.py", "x = 1\ny = 2\nz = 1\n")});                               // 6
    auto built = build(b, tmp.path() / "repo");

    auto fixes = identify_fix_commits(built.history, {});
    CHECK(fixes == hashes_at(built, {4, 5, 6}));
    for (bool parallel : {false, true}) {
        auto labels = label_commits(*built.repo, built.history, fixes, {.depth = ChangeDepth::Max, .parallel = parallel});
        CHECK(labels.inducing_commits == hashes_at(built, {1, 2, 4}));
        CHECK(labels.textual_inducing == hashes_at(built, {1, 4}));
        CHECK(labels.visual_inducing == hashes_at(built, {2}));
        CHECK(labels.is_fix(built.hashes[4]));
        CHECK(labels.is_inducing(built.hashes[4]));
        CHECK(labels.facts().fix_commits == 3);

        std::map<std::string, std::int64_t> ts;
        for (const auto& c : built.history) ts[c.hash] = c.timestamp;
        for (const auto& [inducing, evidence] : labels.provenance) {
            for (const auto& ev : evidence) {
                CHECK(inducing != ev.fix_commit);
                CHECK(ts.at(inducing) < ts.at(ev.fix_commit));
            }
        }

        write_labels_jsonl(tmp / "labels.jsonl", built.history, labels);
        auto back = read_labels_jsonl(tmp / "labels.jsonl");
        CHECK(back.fix_commits == labels.fix_commits);
        CHECK(back.inducing_commits == labels.inducing_commits);
        CHECK(back.provenance == labels.provenance);
    }

    auto none = label_commits(*built.repo, built.history, {});
    CHECK(none.inducing_commits.empty());
    CHECK(none.fix_commits.empty());
}

TEST_CASE("planted scenarios: precision and recall 1 for both depths") {
    TempDir tmp("planted");
    auto fx = fixture::build_fixture_repo(tmp.path() / "repo", {.total_commits = 120, .seed = 5});
    auto repo = mining::open_git_repository(fx.path);
    auto history = mining::walk_history(*repo, "HEAD");
    auto fixes = identify_fix_commits(history, {});
    CHECK(fixes == fx.fix_commits());

    CHECK(label_commits(*repo, history, fixes).inducing_commits == fx.inducing_commits());

    std::set<std::string> recent;
    for (const auto& s : fx.scenarios) {
        for (const auto& f : s.fixes) recent.insert(f.inducing_most_recent.begin(), f.inducing_most_recent.end());
    }
    CHECK(label_commits(*repo, history, fixes, {.depth = ChangeDepth::MostRecent}).inducing_commits == recent);
}

}  // TEST_SUITE
