#include "fixture_repo.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "jitvc/error.hpp"
#include "jitvc/process.hpp"

namespace jitvc::fixture {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

FileOp FileOp::write(std::string path, std::string content) {
    return {Kind::Write, std::move(path), std::move(content), {}};
}
FileOp FileOp::remove(std::string path) { return {Kind::Delete, std::move(path), {}, {}}; }
FileOp FileOp::rename(std::string from, std::string to) { return {Kind::Rename, std::move(to), {}, std::move(from)}; }

RepoBuilder::RepoBuilder(std::int64_t base_timestamp, std::int64_t step)
    : base_(base_timestamp),
      step_(step),
      authors_{{"Ada Lovelace", "ada@example.org"},
               {"Grace Hopper", "grace@example.org"},
               {"Alan Kay", "alan@example.org"},
               {"Miller Puckette", "miller@example.org"}} {}

std::size_t RepoBuilder::commit(std::string message, std::vector<FileOp> ops, std::size_t author) {
    commits_.push_back({std::move(message), std::move(ops), author % authors_.size()});
    return commits_.size() - 1;
}

std::string RepoBuilder::fast_import_stream(const std::string& branch) const {
    std::ostringstream s;
    auto data = [&](const std::string& payload) { s << "data " << payload.size() << '\n' << payload << '\n'; };
    for (std::size_t i = 0; i < commits_.size(); ++i) {
        const auto& c = commits_[i];
        const auto& who = authors_[c.author];
        const auto ts = base_ + static_cast<std::int64_t>(i) * step_;
        s << "commit refs/heads/" << branch << '\n';
        s << "mark :" << (i + 1) << '\n';
        s << "author " << who.name << " <" << who.email << "> " << ts << " +0000\n";
        s << "committer " << who.name << " <" << who.email << "> " << ts << " +0000\n";
        data(c.message + "\n");
        if (i > 0) s << "from :" << i << '\n';
        for (const auto& op : c.ops) {
            switch (op.kind) {
            case FileOp::Kind::Write:
                s << "M 100644 inline " << op.path << '\n';
                data(op.content);
                break;
            case FileOp::Kind::Delete: s << "D " << op.path << '\n'; break;
            case FileOp::Kind::Rename: s << "R " << op.from << ' ' << op.path << '\n'; break;
            }
        }
        s << '\n';
    }
    s << "done\n";
    return s.str();
}

std::vector<std::string> RepoBuilder::build(const fs::path& dir, const std::string& branch) const {
    fs::create_directories(dir);
    auto git = [&](std::vector<std::string> args, std::string input = {}) {
        args.insert(args.begin(), "git");
        ProcessOptions opts;
        opts.cwd = dir;
        opts.input = std::move(input);
        opts.env = {{"LC_ALL", "C"}, {"GIT_CONFIG_NOSYSTEM", "1"}, {"HOME", dir.string()}};
        auto r = run_process(args, opts);
        if (r.exit_code != 0) throw Error(ErrorCode::Vcs, "fixture git " + args[1] + " failed: " + r.err);
        return r;
    };
    git({"init", "-q", "-b", branch});
    const auto marks = fs::absolute(dir) / ".git" / "fixture-marks";
    git({"fast-import", "--quiet", "--done", "--export-marks=" + marks.string()}, fast_import_stream(branch));
    if (!commits_.empty()) git({"reset", "-q", "--hard", branch});

    std::vector<std::string> hashes(commits_.size());
    std::ifstream in(marks);
    for (std::string mark, sha; in >> mark >> sha;) {
        const auto idx = std::stoul(mark.substr(1)) - 1;
        if (idx < hashes.size()) hashes[idx] = sha;
    }
    in.close();
    fs::remove(marks);
    return hashes;
}

// --- content ---------------------------------------------------------------------------------

namespace {

ordered_json patcher_json(const std::vector<Box>& boxes, const std::vector<Patchline>& lines) {
    ordered_json jb = ordered_json::array();
    for (const auto& b : boxes) {
        ordered_json box;
        box["id"] = b.id;
        box["maxclass"] = b.maxclass;
        box["numinlets"] = 1;
        box["numoutlets"] = 1;
        box["patching_rect"] = b.rect;
        if (!b.text.empty()) box["text"] = b.text;
        if (b.subpatch) box["patcher"] = patcher_json(*b.subpatch, {});
        jb.push_back({{"box", box}});
    }
    ordered_json jl = ordered_json::array();
    for (const auto& l : lines) {
        jl.push_back({{"patchline",
                       {{"destination", {l.destination, l.destination_port}}, {"source", {l.source, l.source_port}}}}});
    }
    ordered_json p;
    p["fileversion"] = 1;
    p["rect"] = {100.0, 100.0, 640.0, 480.0};
    p["boxes"] = jb;
    p["lines"] = jl;
    return p;
}

}  // namespace

std::string patch_text(const std::vector<Box>& boxes, const std::vector<Patchline>& lines) {
    ordered_json doc;
    doc["patcher"] = patcher_json(boxes, lines);
    return doc.dump(1, '\t') + "\n";
}

std::set<std::string> Fixture::fix_commits() const {
    std::set<std::string> out;
    for (const auto& s : scenarios) {
        for (const auto& f : s.fixes) out.insert(f.fix);
    }
    return out;
}

std::set<std::string> Fixture::inducing_commits() const {
    std::set<std::string> out;
    for (const auto& s : scenarios) {
        for (const auto& f : s.fixes) out.insert(f.inducing.begin(), f.inducing.end());
    }
    return out;
}

namespace {

using Lines = std::vector<std::string>;

std::string join(const Lines& lines) {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

enum class Lang { Py, C, Lua };

std::string code_line(Lang lang, const std::string& tag, int k) {
    const std::string name = "value_" + tag + "_" + std::to_string(k);
    switch (lang) {
    case Lang::Py: return name + " = compute(" + std::to_string(k) + ")";
    case Lang::C: return "int " + name + " = compute(" + std::to_string(k) + ");";
    case Lang::Lua: return "local " + name + " = compute(" + std::to_string(k) + ")";
    }
    return name;
}

Lines code_lines(Lang lang, const std::string& tag, int n) {
    Lines out;
    for (int k = 1; k <= n; ++k) out.push_back(code_line(lang, tag, k));
    return out;
}

std::vector<Box> boxes(const std::string& tag, int n) {
    std::vector<Box> out;
    for (int k = 1; k <= n; ++k) {
        Box b;
        b.id = "obj-" + std::to_string(k);
        b.text = "cycle~ " + std::to_string(100 * k) + " " + tag;
        b.rect = {20.0 * k, 40.0 * k, 80, 22};
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<Patchline> chain(const std::vector<Box>& bs) {
    std::vector<Patchline> out;
    for (std::size_t i = 0; i + 1 < bs.size(); ++i) out.push_back({bs[i].id, 0, bs[i + 1].id, 0});
    return out;
}

Box* find_box(std::vector<Box>& bs, const std::string& id) {
    for (auto& b : bs) {
        if (b.id == id) return &b;
    }
    return nullptr;
}

struct Step {
    std::string message;
    std::vector<FileOp> ops;
};

struct Expectation {
    std::size_t fix_step;
    std::set<std::size_t> inducing;
    std::set<std::size_t> most_recent;
};

struct Plan {
    std::string name;
    std::string kind;
    std::vector<Step> steps;
    std::vector<Expectation> expectations;

    std::size_t add(std::string message, std::vector<FileOp> ops) {
        steps.push_back({std::move(message), std::move(ops)});
        return steps.size() - 1;
    }
    std::size_t work(std::vector<FileOp> ops) {
        return add("Extend " + name + " step " + std::to_string(steps.size() + 1), std::move(ops));
    }
    std::size_t fix(std::vector<FileOp> ops) {
        return add("Fix " + name + " regression (step " + std::to_string(steps.size() + 1) + ")", std::move(ops));
    }
    void expect(std::size_t fix_step, std::set<std::size_t> inducing, std::optional<std::set<std::size_t>> recent = {}) {
        expectations.push_back({fix_step, inducing, recent.value_or(inducing)});
    }
};

FileOp text(const std::string& path, const Lines& lines) { return FileOp::write(path, join(lines)); }
FileOp patch(const std::string& path, const std::vector<Box>& bs) { return FileOp::write(path, patch_text(bs, chain(bs))); }

std::vector<Plan> scenario_plans() {
    std::vector<Plan> plans;
    auto plan = [&](std::string name, std::string kind) -> Plan& {
        plans.push_back({std::move(name), std::move(kind), {}, {}});
        return plans.back();
    };

    {  // a modified line blames its last writer
        auto& p = plan("text-modify", "textual");
        const std::string f = "s01/core.py";
        auto L = code_lines(Lang::Py, "s01", 6);
        p.work({text(f, L)});
        L[2] = code_line(Lang::Py, "s01", 30);
        auto b = p.work({text(f, L)});
        L[2] = code_line(Lang::Py, "s01", 31);
        p.expect(p.fix({text(f, L)}), {b});
    }
    {  // a deleted line blames its author
        auto& p = plan("text-delete", "textual");
        const std::string f = "s02/core.c";
        auto L = code_lines(Lang::C, "s02", 6);
        auto a = p.work({text(f, L)});
        L.erase(L.begin() + 1);
        p.expect(p.fix({text(f, L)}), {a});
    }
    {  // two lines with different origins
        auto& p = plan("text-two-origins", "textual");
        const std::string f = "s03/core.py";
        auto L = code_lines(Lang::Py, "s03", 6);
        auto a = p.work({text(f, L)});
        L[3] = code_line(Lang::Py, "s03", 40);
        auto b = p.work({text(f, L)});
        L[0] = code_line(Lang::Py, "s03", 41);
        L[3] = code_line(Lang::Py, "s03", 42);
        p.expect(p.fix({text(f, L)}), {a, b});
    }
    {  // removed comment lines are not evidence
        auto& p = plan("text-comment-skip", "textual");
        const std::string f = "s04/core.py";
        auto L = code_lines(Lang::Py, "s04", 6);
        L[1] = "# first note";
        auto a = p.work({text(f, L)});
        L[1] = "# rewritten note";
        p.work({text(f, L)});
        L.erase(L.begin() + 1);
        L[3] = code_line(Lang::Py, "s04", 50);
        p.expect(p.fix({text(f, L)}), {a});
    }
    {  // removed blank lines are not evidence
        auto& p = plan("text-blank-skip", "textual");
        const std::string f = "s05/core.c";
        auto L = code_lines(Lang::C, "s05", 6);
        auto a = p.work({text(f, L)});
        L.insert(L.begin() + 3, "");
        p.work({text(f, L)});
        L.erase(L.begin() + 3);
        L[0] = code_line(Lang::C, "s05", 60);
        p.expect(p.fix({text(f, L)}), {a});
    }
    {  // a fix that only adds lines induces nothing
        auto& p = plan("text-pure-add", "textual");
        const std::string f = "s06/core.py";
        auto L = code_lines(Lang::Py, "s06", 5);
        p.work({text(f, L)});
        L[1] = code_line(Lang::Py, "s06", 70);
        p.work({text(f, L)});
        L.push_back(code_line(Lang::Py, "s06", 71));
        L.push_back(code_line(Lang::Py, "s06", 72));
        p.expect(p.fix({text(f, L)}), {});
    }
    {  // blame follows a whole-file rename
        auto& p = plan("text-rename", "textual");
        auto L = code_lines(Lang::Py, "s07", 6);
        auto a = p.work({text("s07/old_name.py", L)});
        p.add("Rename text-rename module", {FileOp::rename("s07/old_name.py", "s07/new_name.py")});
        L[1] = code_line(Lang::Py, "s07", 80);
        auto c = p.work({text("s07/new_name.py", L)});
        L[1] = code_line(Lang::Py, "s07", 81);
        L[3] = code_line(Lang::Py, "s07", 82);
        p.expect(p.fix({text("s07/new_name.py", L)}), {a, c});
    }
    {  // Lua comment prefix
        auto& p = plan("text-lua-comment", "textual");
        const std::string f = "s08/core.lua";
        auto L = code_lines(Lang::Lua, "s08", 6);
        L[0] = "-- header";
        p.work({text(f, L)});
        L[0] = "-- revised header";
        L[2] = code_line(Lang::Lua, "s08", 90);
        auto b = p.work({text(f, L)});
        L.erase(L.begin());
        L[1] = code_line(Lang::Lua, "s08", 91);
        p.expect(p.fix({text(f, L)}), {b});
    }
    {  // two fixes, two origins
        auto& p = plan("text-two-fixes", "textual");
        const std::string f = "s09/core.c";
        auto L = code_lines(Lang::C, "s09", 6);
        auto a = p.work({text(f, L)});
        L[1] = code_line(Lang::C, "s09", 100);
        auto b = p.work({text(f, L)});
        L[4] = code_line(Lang::C, "s09", 101);
        p.expect(p.fix({text(f, L)}), {a});
        L[1] = code_line(Lang::C, "s09", 102);
        p.expect(p.fix({text(f, L)}), {b});
    }
    {  // a fix can itself induce a later fix
        auto& p = plan("text-repair-chain", "textual");
        const std::string f = "s10/core.py";
        auto L = code_lines(Lang::Py, "s10", 6);
        auto a = p.work({text(f, L)});
        L[2] = code_line(Lang::Py, "s10", 110);
        auto f1 = p.fix({text(f, L)});
        p.expect(f1, {a});
        L[2] = code_line(Lang::Py, "s10", 111);
        p.expect(p.fix({text(f, L)}), {f1});
    }
    {  // one fix across two files
        auto& p = plan("text-multi-file", "textual");
        auto X = code_lines(Lang::Py, "s11x", 5);
        auto Y = code_lines(Lang::C, "s11y", 5);
        auto a = p.work({text("s11/x.py", X), text("s11/y.c", Y)});
        Y[1] = code_line(Lang::C, "s11y", 120);
        auto b = p.work({text("s11/y.c", Y)});
        X[0] = code_line(Lang::Py, "s11x", 121);
        Y[1] = code_line(Lang::C, "s11y", 122);
        p.expect(p.fix({text("s11/x.py", X), text("s11/y.c", Y)}), {a, b});
    }
    {  // deleting a file blames every surviving line
        auto& p = plan("text-delete-file", "textual");
        const std::string f = "s12/core.py";
        auto L = code_lines(Lang::Py, "s12", 5);
        auto a = p.work({text(f, L)});
        L[1] = code_line(Lang::Py, "s12", 130);
        auto b = p.work({text(f, L)});
        p.expect(p.fix({FileOp::remove(f)}), {a, b});
    }
    {  // max depth collects the add and every modify
        auto& p = plan("vis-modify", "visual");
        const std::string f = "s13/synth.maxpat";
        auto B = boxes("s13", 3);
        auto a = p.work({patch(f, B)});
        find_box(B, "obj-2")->text = "cycle~ 220 s13";
        auto b = p.work({patch(f, B)});
        find_box(B, "obj-2")->text = "cycle~ 330 s13";
        p.expect(p.fix({patch(f, B)}), {a, b}, std::set<std::size_t>{b});
    }
    {  // deleted node blames its add
        auto& p = plan("vis-delete-node", "visual");
        const std::string f = "s14/synth.maxpat";
        auto B = boxes("s14", 3);
        auto a = p.work({patch(f, B)});
        B.pop_back();
        p.expect(p.fix({patch(f, B)}), {a});
    }
    {  // multi-hop chain; unrelated node edits are ignored
        auto& p = plan("vis-chain", "visual");
        const std::string f = "s15/synth.maxpat";
        auto B = boxes("s15", 3);
        auto a = p.work({patch(f, B)});
        find_box(B, "obj-1")->text = "cycle~ 101 s15";
        auto b = p.work({patch(f, B)});
        find_box(B, "obj-1")->text = "cycle~ 102 s15";
        auto c = p.work({patch(f, B)});
        find_box(B, "obj-2")->text = "cycle~ 203 s15";
        p.work({patch(f, B)});
        find_box(B, "obj-1")->text = "cycle~ 104 s15";
        p.expect(p.fix({patch(f, B)}), {a, b, c}, std::set<std::size_t>{c});
    }
    {  // adding nodes induces nothing
        auto& p = plan("vis-add-only", "visual");
        const std::string f = "s16/synth.maxpat";
        auto B = boxes("s16", 3);
        p.work({patch(f, B)});
        auto more = boxes("s16", 4);
        p.expect(p.fix({patch(f, more)}), {});
    }
    {  // position-only moves are not modifications
        auto& p = plan("vis-move-only", "visual");
        const std::string f = "s17/synth.maxpat";
        auto B = boxes("s17", 3);
        auto a = p.work({patch(f, B)});
        find_box(B, "obj-1")->rect = {300, 300, 80, 22};
        p.work({patch(f, B)});
        find_box(B, "obj-1")->text = "cycle~ 171 s17";
        p.expect(p.fix({patch(f, B)}), {a});
    }
    {  // node history follows a file rename
        auto& p = plan("vis-rename", "visual");
        auto B = boxes("s18", 3);
        auto a = p.work({patch("s18/before.maxpat", B)});
        p.add("Rename vis-rename document", {FileOp::rename("s18/before.maxpat", "s18/after.maxpat")});
        find_box(B, "obj-1")->text = "cycle~ 181 s18";
        auto c = p.work({patch("s18/after.maxpat", B)});
        find_box(B, "obj-1")->text = "cycle~ 182 s18";
        p.expect(p.fix({patch("s18/after.maxpat", B)}), {a, c}, std::set<std::size_t>{c});
    }
    {  // deleting the file deletes every node
        auto& p = plan("vis-delete-file", "visual");
        const std::string f = "s19/synth.maxpat";
        auto B = boxes("s19", 3);
        auto a = p.work({patch(f, B)});
        find_box(B, "obj-2")->text = "cycle~ 192 s19";
        auto b = p.work({patch(f, B)});
        // obj-2's latest touch is b; obj-1 and obj-3 only have their add.
        p.expect(p.fix({FileOp::remove(f)}), {a, b}, std::set<std::size_t>{a, b});
    }
    {  // a change inside a subpatcher modifies its host box
        auto& p = plan("vis-subpatcher", "visual");
        const std::string f = "s20/synth.maxpat";
        auto B = boxes("s20", 2);
        Box host;
        host.id = "obj-9";
        host.text = "p inner";
        host.subpatch = boxes("s20in", 2);
        B.push_back(host);
        auto a = p.work({patch(f, B)});
        (*find_box(B, "obj-9")->subpatch)[0].text = "cycle~ 201 s20in";
        auto b = p.work({patch(f, B)});
        (*find_box(B, "obj-9")->subpatch)[0].text = "cycle~ 202 s20in";
        p.expect(p.fix({patch(f, B)}), {a, b}, std::set<std::size_t>{b});
    }
    {  // a visual fix that a later fix blames
        auto& p = plan("vis-repair-chain", "visual");
        const std::string f = "s21/synth.maxpat";
        auto B = boxes("s21", 3);
        auto a = p.work({patch(f, B)});
        find_box(B, "obj-1")->text = "cycle~ 211 s21";
        auto f1 = p.fix({patch(f, B)});
        p.expect(f1, {a});
        find_box(B, "obj-1")->text = "cycle~ 212 s21";
        p.expect(p.fix({patch(f, B)}), {a, f1}, std::set<std::size_t>{f1});
    }
    {  // a re-added node's history starts at the re-add
        auto& p = plan("vis-readd", "visual");
        const std::string f = "s22/synth.maxpat";
        auto B = boxes("s22", 3);
        p.work({patch(f, B)});
        auto without = B;
        without.erase(without.begin() + 1);
        p.work({patch(f, without)});
        auto c = p.work({patch(f, B)});
        find_box(B, "obj-2")->text = "cycle~ 222 s22";
        p.expect(p.fix({patch(f, B)}), {c});
    }
    {  // one fix touching textual and visual code
        auto& p = plan("mixed-single-repair", "mixed");
        auto L = code_lines(Lang::Py, "s23", 5);
        auto B = boxes("s23", 3);
        auto a = p.work({text("s23/ctl.py", L), patch("s23/ui.maxpat", B)});
        L[1] = code_line(Lang::Py, "s23", 231);
        find_box(B, "obj-1")->text = "cycle~ 231 s23";
        p.expect(p.fix({text("s23/ctl.py", L), patch("s23/ui.maxpat", B)}), {a});
    }
    {  // textual and visual origins in separate commits
        auto& p = plan("mixed-origins", "mixed");
        auto L = code_lines(Lang::Lua, "s24", 5);
        auto B = boxes("s24", 3);
        auto a = p.work({text("s24/ctl.lua", L)});
        auto b = p.work({patch("s24/ui.maxpat", B), FileOp::write("s24/NOTES.md", "notes\n")});
        L[2] = code_line(Lang::Lua, "s24", 241);
        find_box(B, "obj-3")->text = "cycle~ 243 s24";
        p.expect(p.fix({text("s24/ctl.lua", L), patch("s24/ui.maxpat", B)}), {a, b});
    }
    return plans;
}

// Filler commits over their own files; messages avoid every defect keyword.
class Filler {
public:
    explicit Filler(std::uint64_t seed) : rng_(seed) {}

    Step next() {
        static const char* verbs[] = {"Update docs", "Tidy helpers", "Adjust layout", "Refine helper logic",
                                      "Polish wording", "Reorganize notes", "Tune parameters", "Extend helper"};
        ++count_;
        Step s;
        s.message = std::string(verbs[rng_() % std::size(verbs)]) + " #" + std::to_string(count_);
        // 0 doc, 1 text, 2 visual, 3 text+doc, 4 visual+doc, 5 text+visual, 6 all three
        const auto kind = rng_() % 7;
        const bool doc = kind == 0 || kind == 3 || kind == 4 || kind == 6;
        const bool txt = kind == 1 || kind == 3 || kind == 5 || kind == 6;
        const bool vis = kind == 2 || kind == 4 || kind == 5 || kind == 6;
        if (doc) s.ops.push_back(doc_op());
        if (txt) s.ops.push_back(text_op());
        if (vis) s.ops.push_back(visual_op());
        return s;
    }

private:
    FileOp doc_op() {
        const auto path = "docs/notes_" + std::to_string(rng_() % 3) + ".md";
        auto& lines = docs_[path];
        lines.push_back("Note " + std::to_string(count_));
        return text(path, lines);
    }

    FileOp text_op() {
        const auto k = rng_() % 5;
        const auto path = "lib/helper_" + std::to_string(k) + ".py";
        const auto tag = "h" + std::to_string(k);
        auto& lines = texts_[path];
        if (lines.empty()) {
            lines = code_lines(Lang::Py, tag, 4 + static_cast<int>(rng_() % 5));
        } else if (rng_() % 3 == 0) {
            lines.push_back(code_line(Lang::Py, tag, 1000 + static_cast<int>(count_)));
        } else {
            lines[rng_() % lines.size()] = code_line(Lang::Py, tag, 2000 + static_cast<int>(count_));
        }
        return text(path, lines);
    }

    FileOp visual_op() {
        const auto k = rng_() % 3;
        const auto path = "patches/aux_" + std::to_string(k) + ".maxpat";
        auto& bs = patches_[path];
        if (bs.empty()) {
            bs = boxes("aux" + std::to_string(k), 2 + static_cast<int>(rng_() % 3));
        } else if (rng_() % 3 == 0) {
            Box b;
            b.id = "obj-" + std::to_string(bs.size() + 1);
            b.text = "gain~ " + std::to_string(count_);
            bs.push_back(b);
        } else {
            bs[rng_() % bs.size()].text = "cycle~ " + std::to_string(3000 + count_);
        }
        return patch(path, bs);
    }

    std::mt19937_64 rng_;
    std::size_t count_ = 0;
    std::map<std::string, Lines> docs_, texts_;
    std::map<std::string, std::vector<Box>> patches_;
};

}  // namespace

Fixture build_fixture_repo(const fs::path& dir, const FixtureOptions& options) {
    const auto plans = scenario_plans();
    std::size_t planned = 0;
    for (const auto& p : plans) planned += p.steps.size();
    // The seed commit counts towards the total.
    const std::size_t filler_count = options.total_commits > planned + 1 ? options.total_commits - planned - 1 : 0;

    // Streams: one per scenario plus the filler stream (index plans.size()).
    std::vector<std::size_t> remaining;
    for (const auto& p : plans) remaining.push_back(p.steps.size());
    remaining.push_back(filler_count);
    std::vector<std::size_t> cursor(remaining.size(), 0);
    std::vector<std::vector<std::size_t>> commit_of(plans.size());
    for (std::size_t i = 0; i < plans.size(); ++i) commit_of[i].resize(plans[i].steps.size());

    std::mt19937_64 rng(options.seed);
    Filler filler(options.seed * 31 + 1);
    RepoBuilder builder;
    // Seed commit so every scenario step has a parent.
    builder.commit("Initial import", {FileOp::write("README.md", "Fixture project\n")}, 0);

    // Scenarios start at staggered ticks so that both the early and the late
    // part of the history hold inducing commits.
    const std::size_t total = planned + filler_count;
    std::vector<std::size_t> start(plans.size());
    for (std::size_t i = 0; i < plans.size(); ++i) {
        start[i] = ((i * 7) % plans.size()) * (total * 4 / 5) / plans.size();
    }

    std::size_t left = total;
    for (std::size_t tick = 0; left > 0; ++tick) {
        std::size_t active = remaining.back();
        for (std::size_t i = 0; i < plans.size(); ++i) active += start[i] <= tick ? remaining[i] : 0;
        const bool all = active == 0;
        if (all) active = left;
        auto r = rng() % active;
        std::size_t s = 0;
        for (;; ++s) {
            const bool on = all || s == plans.size() || start[s] <= tick;
            const auto w = on ? remaining[s] : 0;
            if (r < w) break;
            r -= w;
        }
        --remaining[s];
        --left;
        if (s == plans.size()) {
            auto step = filler.next();
            builder.commit(step.message, std::move(step.ops), rng() % 4);
        } else {
            const auto k = cursor[s]++;
            const auto& step = plans[s].steps[k];
            commit_of[s][k] = builder.commit(step.message, step.ops, s + k);
        }
    }

    Fixture fx;
    fx.path = dir;
    fx.hashes = builder.build(dir);
    for (std::size_t i = 0; i < plans.size(); ++i) {
        ScenarioTruth truth{plans[i].name, plans[i].kind, {}};
        auto to_hashes = [&](const std::set<std::size_t>& steps) {
            std::set<std::string> out;
            for (auto st : steps) out.insert(fx.hashes[commit_of[i][st]]);
            return out;
        };
        for (const auto& e : plans[i].expectations) {
            truth.fixes.push_back({fx.hashes[commit_of[i][e.fix_step]], to_hashes(e.inducing), to_hashes(e.most_recent)});
        }
        fx.scenarios.push_back(std::move(truth));
    }
    return fx;
}

std::vector<std::string> build_filler_repo(const fs::path& dir, std::size_t commits, std::uint64_t seed) {
    RepoBuilder builder;
    Filler filler(seed);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < commits; ++i) {
        auto step = filler.next();
        builder.commit(step.message, std::move(step.ops), rng() % 4);
    }
    return builder.build(dir);
}

}  // namespace jitvc::fixture
