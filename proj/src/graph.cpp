#include "dchain/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <utility>

#include "dchain/error.hpp"

namespace dchain {

DualGraph::DualGraph(int node_count, std::vector<Edge> edges, std::vector<std::int64_t> population,
                     std::map<std::string, std::vector<double>> attributes,
                     std::vector<std::string> external_ids)
    : node_count_(node_count),
      edges_(std::move(edges)),
      population_(std::move(population)),
      attributes_(std::move(attributes)),
      external_ids_(std::move(external_ids)) {
    if (node_count_ <= 0) throw GraphError("graph must have at least one node");
    if (static_cast<int>(population_.size()) != node_count_) {
        throw GraphError("population column has " + std::to_string(population_.size()) + " entries, expected " +
                         std::to_string(node_count_));
    }
    for (std::int64_t p : population_) {
        if (p < 0) throw GraphError("negative node population");
        total_population_ += p;
    }
    for (const auto& [name, column] : attributes_) {
        if (static_cast<int>(column.size()) != node_count_) {
            throw GraphError("attribute column '" + name + "' has " + std::to_string(column.size()) +
                             " entries, expected " + std::to_string(node_count_));
        }
    }
    if (external_ids_.empty()) {
        external_ids_.reserve(node_count_);
        for (int v = 0; v < node_count_; ++v) external_ids_.push_back(std::to_string(v));
    } else if (static_cast<int>(external_ids_.size()) != node_count_) {
        throw GraphError("external id list size does not match node count");
    }
    for (int v = 0; v < node_count_; ++v) {
        if (!id_index_.emplace(external_ids_[v], v).second) {
            throw GraphError("duplicate node id '" + external_ids_[v] + "'");
        }
    }

    std::set<std::pair<NodeId, NodeId>> seen;
    std::vector<int> degree(node_count_, 0);
    for (const Edge& e : edges_) {
        if (e.a < 0 || e.b < 0 || e.a >= node_count_ || e.b >= node_count_) {
            throw GraphError("edge endpoint out of range");
        }
        if (e.a == e.b) throw GraphError("self-loop on node '" + external_ids_[e.a] + "'");
        if (!(e.weight >= 0.0)) throw GraphError("edge weight must be nonnegative");
        if (!seen.emplace(std::min(e.a, e.b), std::max(e.a, e.b)).second) {
            throw GraphError("duplicate edge '" + external_ids_[e.a] + "'-'" + external_ids_[e.b] + "'");
        }
        ++degree[e.a];
        ++degree[e.b];
    }

    offsets_.assign(node_count_ + 1, 0);
    for (int v = 0; v < node_count_; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
    adjacency_.resize(offsets_.back());
    std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
    for (EdgeId id = 0; id < edge_count(); ++id) {
        const Edge& e = edges_[id];
        adjacency_[fill[e.a]++] = {e.b, id};
        adjacency_[fill[e.b]++] = {e.a, id};
    }

    std::vector<NodeId> all(node_count_);
    for (int v = 0; v < node_count_; ++v) all[v] = v;
    if (!is_connected_subset(*this, all)) throw GraphError("graph is not connected");
}

DualGraph DualGraph::from_json(const nlohmann::json& doc) {
    if (!doc.contains("nodes") || !doc["nodes"].is_array()) throw GraphError("graph JSON lacks a 'nodes' array");
    if (!doc.contains("edges") || !doc["edges"].is_array()) throw GraphError("graph JSON lacks an 'edges' array");
    const auto& nodes = doc["nodes"];
    const int n = static_cast<int>(nodes.size());

    std::vector<std::string> ids;
    std::vector<std::int64_t> pop;
    std::map<std::string, std::vector<double>> attrs;
    std::unordered_map<std::string, NodeId> index;
    ids.reserve(n);
    pop.reserve(n);
    for (int v = 0; v < n; ++v) {
        const auto& node = nodes[v];
        std::string id = node.at("id").is_string() ? node.at("id").get<std::string>() : node.at("id").dump();
        if (!index.emplace(id, v).second) throw GraphError("duplicate node id '" + id + "'");
        ids.push_back(std::move(id));
        const auto& p = node.at("pop");
        if (!p.is_number_integer()) throw GraphError("node '" + ids.back() + "' has a non-integer population");
        pop.push_back(p.get<std::int64_t>());
        if (node.contains("attrs")) {
            for (auto it = node["attrs"].begin(); it != node["attrs"].end(); ++it) {
                auto& column = attrs[it.key()];
                if (column.empty()) column.assign(n, 0.0);
                column[v] = it.value().get<double>();
            }
        }
    }
    // attribute columns must be complete: every node lists every column
    for (const auto& [name, column] : attrs) {
        for (int v = 0; v < n; ++v) {
            if (!nodes[v].contains("attrs") || !nodes[v]["attrs"].contains(name)) {
                throw GraphError("node '" + ids[v] + "' is missing attribute '" + name + "'");
            }
        }
    }

    std::vector<Edge> edges;
    edges.reserve(doc["edges"].size());
    for (const auto& e : doc["edges"]) {
        auto lookup = [&](const char* key) {
            std::string id = e.at(key).is_string() ? e.at(key).get<std::string>() : e.at(key).dump();
            auto it = index.find(id);
            if (it == index.end()) throw GraphError("edge references unknown node '" + id + "'");
            return it->second;
        };
        Edge edge{lookup("a"), lookup("b"), 1.0};
        if (e.contains("w") && !e["w"].is_null()) edge.weight = e["w"].get<double>();
        edges.push_back(edge);
    }
    return DualGraph(n, std::move(edges), std::move(pop), std::move(attrs), std::move(ids));
}

DualGraph DualGraph::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open graph file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw GraphError("malformed graph JSON in " + path.string() + ": " + e.what());
    }
    return from_json(doc);
}

nlohmann::json DualGraph::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (int v = 0; v < node_count_; ++v) {
        nlohmann::json node{{"id", external_ids_[v]}, {"pop", population_[v]}};
        if (!attributes_.empty()) {
            nlohmann::json attrs = nlohmann::json::object();
            for (const auto& [name, column] : attributes_) attrs[name] = column[v];
            node["attrs"] = std::move(attrs);
        }
        nodes.push_back(std::move(node));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : edges_) {
        edges.push_back({{"a", external_ids_[e.a]}, {"b", external_ids_[e.b]}, {"w", e.weight}});
    }
    return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

int DualGraph::max_degree() const {
    int best = 0;
    for (int v = 0; v < node_count_; ++v) best = std::max(best, degree(v));
    return best;
}

std::span<const double> DualGraph::attribute(const std::string& name) const {
    auto it = attributes_.find(name);
    if (it == attributes_.end()) throw GraphError("unknown attribute column '" + name + "'");
    return it->second;
}

std::vector<std::string> DualGraph::attribute_names() const {
    std::vector<std::string> names;
    for (const auto& [name, column] : attributes_) names.push_back(name);
    return names;
}

std::optional<NodeId> DualGraph::find(const std::string& external_id) const {
    auto it = id_index_.find(external_id);
    if (it == id_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<EdgeId> DualGraph::edge_between(NodeId u, NodeId v) const {
    if (degree(u) > degree(v)) std::swap(u, v);
    for (const Adjacency& adj : neighbors(u)) {
        if (adj.node == v) return adj.edge;
    }
    return std::nullopt;
}

DualGraph make_lattice(int rows, int cols, std::map<std::string, std::vector<double>> attributes) {
    if (rows <= 0 || cols <= 0) throw GraphError("lattice dimensions must be positive");
    const int n = rows * cols;
    std::vector<Edge> edges;
    edges.reserve(2 * n);
    std::vector<std::string> ids;
    ids.reserve(n);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const NodeId v = r * cols + c;
            ids.push_back(std::to_string(r) + "," + std::to_string(c));
            if (c + 1 < cols) edges.push_back({v, v + 1, 1.0});
            if (r + 1 < rows) edges.push_back({v, v + cols, 1.0});
        }
    }
    return DualGraph(n, std::move(edges), std::vector<std::int64_t>(n, 1), std::move(attributes), std::move(ids));
}

bool is_connected_subset(const DualGraph& graph, std::span<const NodeId> nodes) {
    if (nodes.empty()) return false;
    std::vector<char> member(graph.node_count(), 0);
    for (NodeId v : nodes) member[v] = 1;
    std::vector<NodeId> stack{nodes.front()};
    member[nodes.front()] = 2;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        for (const Adjacency& adj : graph.neighbors(v)) {
            if (member[adj.node] == 1) {
                member[adj.node] = 2;
                ++reached;
                stack.push_back(adj.node);
            }
        }
    }
    return reached == nodes.size();
}

}  // namespace dchain
