#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "dchain/graph.hpp"

namespace dchain {

/// Set of small integers with O(1) insert, erase, membership and uniform
/// indexing. Iteration order depends on the operation history, which is
/// deterministic for a given sequence of calls.
class IndexedSet {
public:
    IndexedSet() = default;
    explicit IndexedSet(std::size_t universe) : position_(universe, -1) {}

    bool contains(int x) const { return position_[x] >= 0; }
    void insert(int x) {
        if (position_[x] >= 0) return;
        position_[x] = static_cast<int>(items_.size());
        items_.push_back(x);
    }
    void erase(int x) {
        const int pos = position_[x];
        if (pos < 0) return;
        const int last = items_.back();
        items_[pos] = last;
        position_[last] = pos;
        items_.pop_back();
        position_[x] = -1;
    }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    int operator[](std::size_t i) const { return items_[i]; }
    std::span<const int> items() const { return items_; }
    /// Members in ascending order.
    std::vector<int> sorted() const;

private:
    std::vector<int> items_;
    std::vector<int> position_;
};

/// A (node, district) candidate for a single-node relabeling: `node` lies on
/// the boundary and has a neighbor currently in `district`.
struct FlipMove {
    NodeId node;
    District from;
    District to;
};

/// Node -> district labeling of a DualGraph into k districts labeled 1..k.
///
/// Maintains, under single-node relabeling, the district populations and
/// sizes, the cut edges, the boundary nodes, and the set of distinct
/// (node, neighboring district) pairs used by flip proposals. All of these
/// are always equal to what a full recomputation from the assignment gives.
/// The graph is shared and never mutated.
class Partition {
public:
    /// Throws PartitionError unless every label is in 1..k and every district is nonempty.
    Partition(std::shared_ptr<const DualGraph> graph, std::vector<District> assignment, int k);

    const DualGraph& graph() const { return *graph_; }
    const std::shared_ptr<const DualGraph>& graph_ptr() const { return graph_; }
    int k() const { return k_; }
    int node_count() const { return static_cast<int>(assignment_.size()); }

    District operator[](NodeId v) const { return assignment_[v]; }
    std::span<const District> assignment() const { return assignment_; }

    std::int64_t district_population(District d) const { return district_population_[d]; }
    /// Indexed by district label; entry 0 is unused.
    std::span<const std::int64_t> district_populations() const { return district_population_; }
    int district_size(District d) const { return district_size_[d]; }

    std::span<const EdgeId> cut_edges() const { return cut_edges_.items(); }
    bool is_cut(EdgeId e) const { return cut_edges_.contains(e); }
    std::span<const NodeId> boundary_nodes() const { return boundary_nodes_.items(); }
    bool on_boundary(NodeId v) const { return boundary_nodes_.contains(v); }

    /// Number of distinct (node, neighboring district) pairs.
    std::size_t pair_count() const { return pairs_.size(); }
    FlipMove pair(std::size_t i) const;
    /// Number of neighbors of v currently labeled d.
    int neighbors_in(NodeId v, District d) const { return neighbor_count_[index(v, d)]; }

    /// Change in |cut edges| if v were relabeled to d.
    int cut_delta(NodeId v, District d) const;

    /// Relabel one node in place. Throws std::invalid_argument if v already
    /// has label d and EmptyDistrictError if v is the last node of its district.
    void flip(NodeId v, District d);

    /// Replace the labels of `nodes` by `labels` in place; districts may empty
    /// transiently, but every district must be nonempty afterwards.
    void reassign(std::span<const NodeId> nodes, std::span<const District> labels);

    /// Node ids of district d, ascending.
    std::vector<NodeId> district_nodes(District d) const;

    /// Derived state (populations, cut edges, boundary, pairs) compared as
    /// sets against a from-scratch rebuild of the same assignment.
    bool matches_recomputation() const;

    /// Same labeling with districts renumbered by first occurrence in node order.
    std::vector<District> canonical_assignment() const;

    friend bool operator==(const Partition& lhs, const Partition& rhs);

private:
    std::size_t index(NodeId v, District d) const {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(k_ + 1) + static_cast<std::size_t>(d);
    }
    void relabel(NodeId v, District d);
    void refresh_pair(NodeId v, District d);

    std::shared_ptr<const DualGraph> graph_;
    int k_;
    std::vector<District> assignment_;
    std::vector<std::int64_t> district_population_;
    std::vector<int> district_size_;
    IndexedSet cut_edges_;
    std::vector<int> cut_degree_;
    IndexedSet boundary_nodes_;
    std::vector<int> neighbor_count_;
    IndexedSet pairs_;
};

/// Value-returning relabeling; the input is unchanged.
Partition apply_flip(const Partition& partition, NodeId node, District new_district);

std::size_t cut_edge_count(const Partition& partition);
/// |boundary nodes| / |V|.
double boundary_node_fraction(const Partition& partition);
/// |cut edges| / |E|; zero for edgeless graphs.
double cut_edge_fraction(const Partition& partition);

/// True iff every district induces a connected subgraph.
bool is_contiguous(const Partition& partition);
/// Same test on a raw assignment with labels 1..k (labels may be missing).
bool is_contiguous(const DualGraph& graph, std::span<const District> assignment, int k);
/// True iff the district of `removed` stays connected (or becomes empty) once
/// `removed` leaves it. Assumes that district is currently connected.
bool stays_connected_without(const Partition& partition, NodeId removed);

/// max_i |pop_i - ideal| / ideal with ideal = total / district_pops.size().
double population_deviation(std::span<const std::int64_t> district_pops);
/// Population deviation of the partition's districts against total/k.
double population_deviation(const Partition& partition);

/// Fraction of nodes with identical labels in the two assignments.
double assignment_overlap(std::span<const District> a, std::span<const District> b);

/// Relabel districts in order of first appearance (node 0 is always district 1).
std::vector<District> canonicalize(std::span<const District> assignment);

/// Vertical-stripe labeling of a rows x cols lattice into k equal-width stripes.
std::vector<District> stripes_assignment(int rows, int cols, int k);

/// CSV with header `node_id,district`, one row per node, in node order.
void write_assignment_csv(const Partition& partition, const std::filesystem::path& path);
/// Reads the CSV above; rows may be in any order but every node must appear once.
/// Returns labels and the district count k (the maximum label).
std::pair<std::vector<District>, int> read_assignment_csv(const DualGraph& graph, const std::filesystem::path& path);

}  // namespace dchain
