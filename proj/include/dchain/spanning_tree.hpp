#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dchain/graph.hpp"
#include "dchain/random.hpp"

namespace dchain {

/// Spanning tree over a node subset H of a DualGraph, rooted at H's first
/// node. Nodes are addressed by their position in `nodes()`.
class SpanningTree {
public:
    /// `parent[i]` is the local index of node i's parent (-1 for the root) and
    /// `parent_edge[i]` the graph edge joining them.
    SpanningTree(const DualGraph& graph, std::vector<NodeId> nodes, std::vector<int> parent,
                 std::vector<EdgeId> parent_edge);

    /// Build from an unordered edge list; throws GraphError unless the edges
    /// form a spanning tree of the induced subgraph on `nodes`.
    static SpanningTree from_edges(const DualGraph& graph, std::vector<NodeId> nodes, std::span<const EdgeId> edges);

    std::span<const NodeId> nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    /// Tree edges, one per non-root node (in local node order).
    std::vector<EdgeId> edges() const;
    int parent(int local) const { return parent_[local]; }
    EdgeId parent_edge(int local) const { return parent_edge_[local]; }
    /// Local indices ordered so that every parent precedes its children.
    std::span<const int> top_down_order() const { return order_; }

    std::int64_t weight(int local) const { return weights_[local]; }
    std::int64_t total_weight() const { return total_weight_; }
    /// Weight of the subtree hanging below each node (its own included).
    std::span<const std::int64_t> subtree_weights() const { return subtree_; }

    /// Membership mask (local order) of the component containing `local`'s
    /// subtree once the edge to its parent is removed.
    std::vector<char> subtree_mask(int local) const;

    /// Checks |H|-1 edges, connectivity, acyclicity, and that every edge is a
    /// graph edge inside H.
    bool is_valid(const DualGraph& graph) const;

private:
    const DualGraph* graph_;
    std::vector<NodeId> nodes_;
    std::vector<int> parent_;
    std::vector<EdgeId> parent_edge_;
    std::vector<int> order_;
    std::vector<std::int64_t> weights_;
    std::vector<std::int64_t> subtree_;
    std::int64_t total_weight_ = 0;
};

/// Uniform spanning trees of one induced subgraph via Wilson's loop-erased
/// random walks. The induced adjacency is built once so repeated draws on
/// the same region (tree redraws) do not rebuild it.
class UstSampler {
public:
    /// Throws GraphError if `nodes` is empty or does not induce a connected subgraph.
    UstSampler(const DualGraph& graph, std::vector<NodeId> nodes);

    SpanningTree sample(RandomSource& rng) const;
    std::span<const NodeId> nodes() const { return nodes_; }

private:
    const DualGraph* graph_;
    std::vector<NodeId> nodes_;
    std::vector<int> offsets_;
    std::vector<int> neighbor_;
    std::vector<EdgeId> neighbor_edge_;
};

SpanningTree wilson_ust(const DualGraph& graph, std::span<const NodeId> nodes, RandomSource& rng);

/// Graph edge ids of tree edges whose removal leaves both components with
/// weight within (1 +- epsilon) * ideal. Pass ideal = total_weight / 2 for a
/// bipartition. Returned in top-down tree order. An empty list means the tree
/// has no admissible cut.
std::vector<EdgeId> find_balanced_cuts(const SpanningTree& tree, double ideal, double epsilon);
/// Same cuts, each named by the local index of the child endpoint (the cut
/// edge is `tree.parent_edge(child)`).
std::vector<int> find_balanced_cut_children(const SpanningTree& tree, double ideal, double epsilon);

/// True when |weight - ideal| <= epsilon * ideal (with a relative rounding
/// allowance of 1e-12).
bool within_tolerance(double weight, double ideal, double epsilon);

}  // namespace dchain
