#pragma once

// Max/MSP patch model: boxes become nodes, patchlines become edges, and a box
// that embeds its own "patcher" object carries a nested child graph.

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace jitvc::visual {

using Position = std::array<double, 4>;
using AttributeMap = std::map<std::string, nlohmann::json>;

struct VisualGraph;

struct VisualNode {
    std::string id;
    std::string class_name;
    // Canonicalized values; never holds the position or the nested patcher.
    AttributeMap attributes;
    std::optional<Position> position;
    std::shared_ptr<const VisualGraph> children;
};

struct VisualEdge {
    std::string source_id;
    std::size_t source_port = 0;
    std::string dest_id;
    std::size_t dest_port = 0;

    auto operator<=>(const VisualEdge&) const = default;
};

struct VisualGraph {
    std::vector<VisualNode> nodes;
    std::vector<VisualEdge> edges;
};

struct GraphDiff {
    std::set<std::string> added;
    std::set<std::string> modified;
    std::set<std::string> deleted;
    std::size_t nodes_before = 0;

    bool empty() const noexcept { return added.empty() && modified.empty() && deleted.empty(); }
    std::size_t changed() const noexcept { return added.size() + modified.size() + deleted.size(); }
    bool operator==(const GraphDiff&) const = default;
};

struct DiffOptions {
    bool count_position_changes = false;
};

// Position lives under this key in Max patch boxes.
inline constexpr std::string_view kPositionKey = "patching_rect";

// Throws Error(MalformedPatch) or Error(DuplicateNodeId).
VisualGraph parse_patch(std::string_view content);

// Canonical re-serialization: sorted attribute keys, integral numbers as
// integers, one "patcher" root. parse_patch(serialize_patch(g)) reproduces g.
std::string serialize_patch(const VisualGraph& graph);

// Cheap content probe used by file classification.
bool has_patcher_key(std::string_view content) noexcept;

std::size_t count_nodes(const VisualGraph& graph) noexcept;

// Every node, including nested ones, keyed by its path-qualified id
// ("parent/child"). Pointers borrow from `graph`.
std::map<std::string, const VisualNode*> flatten(const VisualGraph& graph);

GraphDiff diff_graphs(const VisualGraph& old_graph, const VisualGraph& new_graph,
                      const DiffOptions& options = {});

nlohmann::json canonicalize(const nlohmann::json& value);

}  // namespace jitvc::visual
