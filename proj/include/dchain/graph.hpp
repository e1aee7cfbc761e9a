#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace dchain {

using NodeId = int;
using EdgeId = int;
/// District labels are 1..k; 0 marks an unassigned node during seeding.
using District = int;
inline constexpr District kUnassigned = 0;

struct Edge {
    NodeId a;
    NodeId b;
    double weight = 1.0;

    NodeId other(NodeId v) const { return v == a ? b : a; }
};

struct Adjacency {
    NodeId node;
    EdgeId edge;
};

/// Immutable dual graph: one node per geographic unit, edges between
/// adjacent units, an integer population per node and named numeric
/// attribute columns (votes, demographic counts, unit ids).
///
/// Construction validates the graph: no self-loops, no duplicate edges,
/// connected, and every attribute column has one entry per node. Node ids
/// are dense 0..n-1; external string ids are kept for IO only.
class DualGraph {
public:
    DualGraph(int node_count, std::vector<Edge> edges, std::vector<std::int64_t> population,
              std::map<std::string, std::vector<double>> attributes = {},
              std::vector<std::string> external_ids = {});

    /// Parse the ingestion format
    /// `{"nodes":[{"id":str,"pop":int,"attrs":{...}}],"edges":[{"a":str,"b":str,"w":num?}]}`.
    static DualGraph from_json(const nlohmann::json& doc);
    static DualGraph load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    int node_count() const { return node_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    const Edge& edge(EdgeId e) const { return edges_[e]; }
    std::span<const Edge> edges() const { return edges_; }

    std::span<const Adjacency> neighbors(NodeId v) const {
        return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
    }
    int degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
    int max_degree() const;

    std::int64_t population(NodeId v) const { return population_[v]; }
    std::span<const std::int64_t> populations() const { return population_; }
    std::int64_t total_population() const { return total_population_; }

    bool has_attribute(const std::string& name) const { return attributes_.contains(name); }
    /// Throws GraphError for unknown columns.
    std::span<const double> attribute(const std::string& name) const;
    std::vector<std::string> attribute_names() const;

    const std::string& external_id(NodeId v) const { return external_ids_[v]; }
    std::optional<NodeId> find(const std::string& external_id) const;

    /// Edge id joining u and v, if adjacent.
    std::optional<EdgeId> edge_between(NodeId u, NodeId v) const;

private:
    int node_count_;
    std::vector<Edge> edges_;
    std::vector<int> offsets_;
    std::vector<Adjacency> adjacency_;
    std::vector<std::int64_t> population_;
    std::int64_t total_population_ = 0;
    std::map<std::string, std::vector<double>> attributes_;
    std::vector<std::string> external_ids_;
    std::unordered_map<std::string, NodeId> id_index_;
};

/// rows x cols lattice with unit population; node (r, c) has id r*cols + c
/// and external id "r,c".
DualGraph make_lattice(int rows, int cols, std::map<std::string, std::vector<double>> attributes = {});

/// True when the subgraph induced on `nodes` is connected (empty counts as not connected).
bool is_connected_subset(const DualGraph& graph, std::span<const NodeId> nodes);

}  // namespace dchain
