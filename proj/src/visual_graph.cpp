#include "jitvc/visual_graph.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

#include "jitvc/error.hpp"

namespace jitvc::visual {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedPatch, what); }

std::size_t port_of(const json& endpoint, const char* which) {
    if (!endpoint.is_array() || endpoint.size() < 2 || !endpoint[0].is_string() ||
        !endpoint[1].is_number_integer() || endpoint[1].get<long long>() < 0) {
        malformed(std::string("patchline ") + which + " must be [id, non-negative port]");
    }
    return endpoint[1].get<std::size_t>();
}

std::optional<Position> position_of(const json& value) {
    if (!value.is_array() || value.size() != 4) return std::nullopt;
    Position pos{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (!value[i].is_number()) return std::nullopt;
        pos[i] = value[i].get<double>();
    }
    return pos;
}

VisualGraph parse_patcher(const json& patcher, const std::string& where) {
    if (!patcher.is_object()) malformed(where + ": patcher is not an object");

    VisualGraph graph;
    std::unordered_set<std::string> ids;

    if (auto boxes = patcher.find("boxes"); boxes != patcher.end()) {
        if (!boxes->is_array()) malformed(where + ": boxes is not an array");
        for (const auto& entry : *boxes) {
            const json* box = &entry;
            if (entry.is_object() && entry.contains("box")) box = &entry["box"];
            if (!box->is_object()) malformed(where + ": box is not an object");

            auto id_it = box->find("id");
            if (id_it == box->end() || !id_it->is_string() || id_it->get<std::string>().empty()) {
                malformed(where + ": box without a string id");
            }
            VisualNode node;
            node.id = id_it->get<std::string>();
            if (!ids.insert(node.id).second) {
                throw Error(ErrorCode::DuplicateNodeId, where + ": " + node.id);
            }
            if (auto cls = box->find("maxclass"); cls != box->end() && cls->is_string()) {
                node.class_name = cls->get<std::string>();
            }
            for (const auto& [key, value] : box->items()) {
                if (key == "id" || key == "maxclass") continue;
                if (key == kPositionKey) {
                    node.position = position_of(value);
                    if (node.position) continue;
                }
                if (key == "patcher") {
                    node.children = std::make_shared<const VisualGraph>(
                        parse_patcher(value, where + "/" + node.id));
                    continue;
                }
                node.attributes.emplace(key, canonicalize(value));
            }
            graph.nodes.push_back(std::move(node));
        }
    }

    if (auto lines = patcher.find("lines"); lines != patcher.end()) {
        if (!lines->is_array()) malformed(where + ": lines is not an array");
        for (const auto& entry : *lines) {
            const json* line = &entry;
            if (entry.is_object() && entry.contains("patchline")) line = &entry["patchline"];
            if (!line->is_object() || !line->contains("source") || !line->contains("destination")) {
                malformed(where + ": patchline without source/destination");
            }
            const json& src = (*line)["source"];
            const json& dst = (*line)["destination"];
            VisualEdge edge;
            edge.source_port = port_of(src, "source");
            edge.dest_port = port_of(dst, "destination");
            edge.source_id = src[0].get<std::string>();
            edge.dest_id = dst[0].get<std::string>();
            if (!ids.contains(edge.source_id) || !ids.contains(edge.dest_id)) {
                malformed(where + ": patchline references unknown box " + edge.source_id + " -> " +
                          edge.dest_id);
            }
            graph.edges.push_back(std::move(edge));
        }
    }
    return graph;
}

json serialize_patcher(const VisualGraph& graph) {
    json boxes = json::array();
    for (const auto& node : graph.nodes) {
        json box = json::object();
        for (const auto& [key, value] : node.attributes) box[key] = value;
        box["id"] = node.id;
        box["maxclass"] = node.class_name;
        if (node.position) {
            json rect = json::array();
            for (double v : *node.position) rect.push_back(canonicalize(json(v)));
            box[std::string(kPositionKey)] = std::move(rect);
        }
        if (node.children) box["patcher"] = serialize_patcher(*node.children);
        boxes.push_back(json{{"box", std::move(box)}});
    }
    json lines = json::array();
    for (const auto& edge : graph.edges) {
        lines.push_back(json{{"patchline",
                              {{"source", {edge.source_id, edge.source_port}},
                               {"destination", {edge.dest_id, edge.dest_port}}}}});
    }
    return json{{"boxes", std::move(boxes)}, {"lines", std::move(lines)}};
}

void flatten_into(const VisualGraph& graph, const std::string& prefix,
                  std::map<std::string, const VisualNode*>& out) {
    for (const auto& node : graph.nodes) {
        std::string path = prefix.empty() ? node.id : prefix + "/" + node.id;
        if (node.children) flatten_into(*node.children, path, out);
        out.emplace(std::move(path), &node);
    }
}

bool graphs_equivalent(const VisualGraph* a, const VisualGraph* b, const DiffOptions& options);

bool nodes_equivalent(const VisualNode& a, const VisualNode& b, const DiffOptions& options) {
    if (a.class_name != b.class_name || a.attributes != b.attributes) return false;
    if (options.count_position_changes && a.position != b.position) return false;
    return graphs_equivalent(a.children.get(), b.children.get(), options);
}

bool graphs_equivalent(const VisualGraph* a, const VisualGraph* b, const DiffOptions& options) {
    static const VisualGraph kEmpty;
    if (a == nullptr && b == nullptr) return true;
    if (a == nullptr) a = &kEmpty;
    if (b == nullptr) b = &kEmpty;
    if (a->nodes.size() != b->nodes.size()) return false;

    std::map<std::string_view, const VisualNode*> by_id;
    for (const auto& n : a->nodes) by_id.emplace(n.id, &n);
    for (const auto& n : b->nodes) {
        auto it = by_id.find(n.id);
        if (it == by_id.end() || !nodes_equivalent(*it->second, n, options)) return false;
    }
    std::multiset<VisualEdge> ea(a->edges.begin(), a->edges.end());
    std::multiset<VisualEdge> eb(b->edges.begin(), b->edges.end());
    return ea == eb;
}

}  // namespace

json canonicalize(const json& value) {
    switch (value.type()) {
    case json::value_t::number_float: {
        double d = value.get<double>();
        if (std::isfinite(d) && std::floor(d) == d && std::fabs(d) < 9.0e15) {
            return json(static_cast<std::int64_t>(d));
        }
        return json(d);
    }
    case json::value_t::number_unsigned:
        return json(static_cast<std::int64_t>(value.get<std::uint64_t>()));
    case json::value_t::array: {
        json out = json::array();
        for (const auto& v : value) out.push_back(canonicalize(v));
        return out;
    }
    case json::value_t::object: {
        json out = json::object();
        for (const auto& [k, v] : value.items()) out[k] = canonicalize(v);
        return out;
    }
    default:
        return value;
    }
}

VisualGraph parse_patch(std::string_view content) {
    json doc = json::parse(content.begin(), content.end(), nullptr, false);
    if (doc.is_discarded()) malformed("not parseable as JSON");
    if (!doc.is_object() || !doc.contains("patcher")) malformed("missing top-level patcher key");
    return parse_patcher(doc["patcher"], "");
}

std::string serialize_patch(const VisualGraph& graph) {
    return json{{"patcher", serialize_patcher(graph)}}.dump(1, '\t');
}

bool has_patcher_key(std::string_view content) noexcept {
    return content.find("\"patcher\"") != std::string_view::npos;
}

std::size_t count_nodes(const VisualGraph& graph) noexcept {
    std::size_t n = graph.nodes.size();
    for (const auto& node : graph.nodes) {
        if (node.children) n += count_nodes(*node.children);
    }
    return n;
}

std::map<std::string, const VisualNode*> flatten(const VisualGraph& graph) {
    std::map<std::string, const VisualNode*> out;
    flatten_into(graph, "", out);
    return out;
}

GraphDiff diff_graphs(const VisualGraph& old_graph, const VisualGraph& new_graph,
                      const DiffOptions& options) {
    const auto before = flatten(old_graph);
    const auto after = flatten(new_graph);

    GraphDiff diff;
    diff.nodes_before = before.size();
    for (const auto& [path, node] : before) {
        auto it = after.find(path);
        if (it == after.end()) {
            diff.deleted.insert(path);
        } else if (!nodes_equivalent(*node, *it->second, options)) {
            diff.modified.insert(path);
        }
    }
    for (const auto& [path, node] : after) {
        if (!before.contains(path)) diff.added.insert(path);
    }
    return diff;
}

}  // namespace jitvc::visual
