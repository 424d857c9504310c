#include <doctest.h>

#include <random>

#include "jitvc/error.hpp"
#include "jitvc/visual_graph.hpp"
#include "support/test_support.hpp"

using namespace jitvc;
using namespace jitvc::visual;

namespace {

std::set<std::string> ids_of(const VisualGraph& g) {
    std::set<std::string> out;
    for (const auto& [id, node] : flatten(g)) out.insert(id);
    return out;
}

// Random edit of `g`: tweak, drop and add a few nodes, keeping edges valid.
VisualGraph mutate(const VisualGraph& g, std::mt19937_64& rng) {
    VisualGraph out;
    std::set<std::string> kept;
    for (const auto& n : g.nodes) {
        const auto roll = rng() % 6;
        if (roll == 0) continue;  // delete
        VisualNode copy = n;
        if (roll == 1) copy.attributes["text"] = "edited " + std::to_string(rng() % 3);
        if (roll == 2 && copy.position) (*copy.position)[0] += 10;
        if (roll == 3 && copy.children) {
            copy.children = std::make_shared<VisualGraph>(mutate(*copy.children, rng));
        }
        kept.insert(copy.id);
        out.nodes.push_back(std::move(copy));
    }
    const int extra = static_cast<int>(rng() % 3);
    for (int i = 0; i < extra; ++i) {
        VisualNode n;
        n.id = "new-" + std::to_string(i);
        n.class_name = "message";
        kept.insert(n.id);
        out.nodes.push_back(std::move(n));
    }
    for (const auto& e : g.edges) {
        if (kept.contains(e.source_id) && kept.contains(e.dest_id)) out.edges.push_back(e);
    }
    return out;
}

}  // namespace

TEST_SUITE("visual_graph") {

TEST_CASE("parse: two boxes and one patchline") {
    auto g = parse_patch(
        R"({"patcher":{"boxes":[{"box":{"id":"obj-1","maxclass":"toggle"}},{"box":{"id":"obj-2","maxclass":"print"}}],"lines":[{"patchline":{"source":["obj-1",0],"destination":["obj-2",0]}}]}})");
    CHECK(g.nodes.size() == 2);
    CHECK(g.edges.size() == 1);
    CHECK(g.nodes[0].class_name == "toggle");
    CHECK(g.edges[0].source_id == "obj-1");
    CHECK(g.edges[0].dest_id == "obj-2");
}

TEST_CASE("parse: empty patcher") {
    auto g = parse_patch(R"({"patcher":{"boxes":[],"lines":[]}})");
    CHECK(g.nodes.empty());
    CHECK(g.edges.empty());
    CHECK(count_nodes(g) == 0);
}

TEST_CASE("parse: errors") {
    auto code_of = [](std::string_view text) {
        try {
            parse_patch(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Io;
    };
    CHECK(code_of(R"({"notpatcher":{}})") == ErrorCode::MalformedPatch);
    CHECK(code_of("not json at all") == ErrorCode::MalformedPatch);
    CHECK(code_of(R"({"patcher":{"boxes":[{"box":{"maxclass":"x"}}]}})") == ErrorCode::MalformedPatch);
    CHECK(code_of(R"({"patcher":{"boxes":[{"box":{"id":"a"}},{"box":{"id":"a"}}]}})") ==
          ErrorCode::DuplicateNodeId);
    CHECK(code_of(R"({"patcher":{"boxes":[{"box":{"id":"a"}}],"lines":[{"patchline":{"source":["a",0],"destination":["zz",0]}}]}})") ==
          ErrorCode::MalformedPatch);
}

TEST_CASE("parse: position is kept out of the attributes") {
    auto g = parse_patch(R"({"patcher":{"boxes":[{"box":{"id":"a","maxclass":"newobj","text":"+ 1","patching_rect":[10.0,20.0,30.0,22.0]}}]}})");
    REQUIRE(g.nodes.size() == 1);
    CHECK_FALSE(g.nodes[0].attributes.contains("patching_rect"));
    REQUIRE(g.nodes[0].position.has_value());
    CHECK((*g.nodes[0].position)[1] == 20.0);
    CHECK(g.nodes[0].attributes.at("text") == "+ 1");
}

TEST_CASE("count_nodes examples") {
    auto flat = parse_patch(R"({"patcher":{"boxes":[{"box":{"id":"a"}},{"box":{"id":"b"}}]}})");
    CHECK(count_nodes(flat) == 2);

    auto nested = parse_patch(R"({"patcher":{"boxes":[
        {"box":{"id":"a","maxclass":"newobj","text":"p sub","patcher":{"boxes":[{"box":{"id":"x"}},{"box":{"id":"y"}},{"box":{"id":"z"}}]}}},
        {"box":{"id":"b"}}]}})");
    CHECK(count_nodes(nested) == 5);
    auto ids = ids_of(nested);
    CHECK(ids.contains("a/x"));
    CHECK(ids.contains("a/z"));
}

TEST_CASE("diff examples") {
    VisualGraph empty;
    CHECK(diff_graphs(empty, empty).empty());

    auto two = parse_patch(R"({"patcher":{"boxes":[{"box":{"id":"obj-1"}},{"box":{"id":"obj-2"}}]}})");
    auto d = diff_graphs(empty, two);
    CHECK(d.added == std::set<std::string>{"obj-1", "obj-2"});
    CHECK(d.deleted.empty());
    CHECK(d.modified.empty());

    auto before = parse_patch(R"({"patcher":{"boxes":[
        {"box":{"id":"obj-1","maxclass":"newobj","text":"+ 1","patching_rect":[0,0,40,22]}},
        {"box":{"id":"obj-2","maxclass":"newobj","text":"print","patching_rect":[0,50,40,22]}}]}})");
    auto after = parse_patch(R"({"patcher":{"boxes":[
        {"box":{"id":"obj-1","maxclass":"newobj","text":"+ 2","patching_rect":[0,0,40,22]}},
        {"box":{"id":"obj-2","maxclass":"newobj","text":"print","patching_rect":[100,50,40,22]}}]}})");
    d = diff_graphs(before, after);
    CHECK(d.modified == std::set<std::string>{"obj-1"});
    CHECK(d.added.empty());
    CHECK(d.deleted.empty());
    CHECK(d.nodes_before == 2);

    d = diff_graphs(before, after, DiffOptions{.count_position_changes = true});
    CHECK(d.modified == std::set<std::string>{"obj-1", "obj-2"});
}

TEST_CASE("diff: number formatting and key order are not changes") {
    auto a = parse_patch(R"({"patcher":{"boxes":[{"box":{"id":"o","maxclass":"flonum","minimum":1.0,"format":{"b":1,"a":2}}}]}})");
    auto b = parse_patch(R"({"patcher":{"boxes":[{"box":{"format":{"a":2,"b":1.0},"minimum":1,"maxclass":"flonum","id":"o"}}]}})");
    CHECK(diff_graphs(a, b).empty());
}

TEST_CASE("diff: a nested change marks the host and the child") {
    auto a = parse_patch(R"({"patcher":{"boxes":[{"box":{"id":"p","patcher":{"boxes":[{"box":{"id":"c","text":"1"}}]}}}]}})");
    auto b = parse_patch(R"({"patcher":{"boxes":[{"box":{"id":"p","patcher":{"boxes":[{"box":{"id":"c","text":"2"}}]}}}]}})");
    auto d = diff_graphs(a, b);
    CHECK(d.modified == std::set<std::string>{"p", "p/c"});
    CHECK(d.nodes_before == 2);
}

TEST_CASE("property: serialize/parse round trip") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        auto g = testing::random_graph(rng);
        auto text = serialize_patch(g);
        auto back = parse_patch(text);
        CHECK(ids_of(back) == ids_of(g));
        auto fa = flatten(g), fb = flatten(back);
        for (const auto& [id, node] : fa) {
            REQUIRE(fb.contains(id));
            CHECK(fb.at(id)->attributes == node->attributes);
            CHECK(fb.at(id)->class_name == node->class_name);
            CHECK(fb.at(id)->position == node->position);
        }
        std::multiset<VisualEdge> ea(g.edges.begin(), g.edges.end()), eb(back.edges.begin(), back.edges.end());
        CHECK(ea == eb);
        CHECK(serialize_patch(back) == text);
        CHECK(diff_graphs(g, back, DiffOptions{.count_position_changes = true}).empty());
    }
}

TEST_CASE("property: diff invariants over random pairs") {
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 500; ++trial) {
        auto old_g = testing::random_graph(rng);
        auto new_g = (trial % 4 == 0) ? testing::random_graph(rng) : mutate(old_g, rng);

        CHECK(diff_graphs(old_g, old_g).empty());
        auto fwd = diff_graphs(old_g, new_g);
        auto rev = diff_graphs(new_g, old_g);
        CHECK(fwd.added == rev.deleted);
        CHECK(fwd.deleted == rev.added);
        CHECK(fwd.modified == rev.modified);
        CHECK(count_nodes(new_g) + fwd.deleted.size() == count_nodes(old_g) + fwd.added.size());
        CHECK(fwd.nodes_before == count_nodes(old_g));
        CHECK(fwd.nodes_before >= fwd.deleted.size() + fwd.modified.size());
        for (const auto& id : fwd.added) {
            CHECK_FALSE(fwd.modified.contains(id));
            CHECK_FALSE(fwd.deleted.contains(id));
        }
        for (const auto& id : fwd.modified) CHECK_FALSE(fwd.deleted.contains(id));
    }
}

TEST_CASE("has_patcher_key") {
    CHECK(has_patcher_key(R"({"patcher":{}})"));
    CHECK_FALSE(has_patcher_key("plain text"));
}

}  // TEST_SUITE
