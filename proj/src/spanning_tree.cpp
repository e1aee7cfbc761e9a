#include "dchain/spanning_tree.hpp"

#include <cmath>
#include <numeric>
#include <unordered_map>

#include "dchain/error.hpp"

namespace dchain {

namespace {

std::unordered_map<NodeId, int> local_index(std::span<const NodeId> nodes) {
    std::unordered_map<NodeId, int> index;
    index.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!index.emplace(nodes[i], static_cast<int>(i)).second) throw GraphError("node subset has duplicates");
    }
    return index;
}

}  // namespace

SpanningTree::SpanningTree(const DualGraph& graph, std::vector<NodeId> nodes, std::vector<int> parent,
                           std::vector<EdgeId> parent_edge)
    : graph_(&graph), nodes_(std::move(nodes)), parent_(std::move(parent)), parent_edge_(std::move(parent_edge)) {
    const int m = static_cast<int>(nodes_.size());
    if (static_cast<int>(parent_.size()) != m || static_cast<int>(parent_edge_.size()) != m) {
        throw GraphError("spanning tree parent arrays do not match node count");
    }
    // children lists in CSR form, then a top-down (BFS) order
    std::vector<int> child_count(m + 1, 0);
    int root = -1;
    for (int i = 0; i < m; ++i) {
        if (parent_[i] < 0) {
            if (root >= 0) throw GraphError("spanning tree has more than one root");
            root = i;
        } else {
            if (parent_[i] >= m) throw GraphError("spanning tree parent index out of range");
            ++child_count[parent_[i] + 1];
        }
    }
    if (root < 0) throw GraphError("spanning tree has no root");
    std::partial_sum(child_count.begin(), child_count.end(), child_count.begin());
    std::vector<int> children(m > 0 ? m - 1 : 0);
    std::vector<int> fill(child_count.begin(), child_count.end() - 1);
    for (int i = 0; i < m; ++i) {
        if (parent_[i] >= 0) children[fill[parent_[i]]++] = i;
    }
    order_.reserve(m);
    order_.push_back(root);
    for (std::size_t head = 0; head < order_.size(); ++head) {
        const int v = order_[head];
        for (int c = child_count[v]; c < child_count[v + 1]; ++c) order_.push_back(children[c]);
    }
    if (static_cast<int>(order_.size()) != m) throw GraphError("parent structure contains a cycle");

    weights_.resize(m);
    subtree_.resize(m);
    for (int i = 0; i < m; ++i) {
        weights_[i] = graph.population(nodes_[i]);
        subtree_[i] = weights_[i];
        total_weight_ += weights_[i];
    }
    for (int t = m - 1; t > 0; --t) {
        const int v = order_[t];
        subtree_[parent_[v]] += subtree_[v];
    }
}

SpanningTree SpanningTree::from_edges(const DualGraph& graph, std::vector<NodeId> nodes,
                                      std::span<const EdgeId> edges) {
    if (nodes.empty()) throw GraphError("spanning tree over an empty node set");
    if (edges.size() + 1 != nodes.size()) throw GraphError("spanning tree needs exactly |H|-1 edges");
    const auto index = local_index(nodes);
    const int m = static_cast<int>(nodes.size());
    std::vector<std::vector<std::pair<int, EdgeId>>> adj(m);
    for (EdgeId e : edges) {
        const Edge& edge = graph.edge(e);
        auto a = index.find(edge.a);
        auto b = index.find(edge.b);
        if (a == index.end() || b == index.end()) throw GraphError("tree edge leaves the node subset");
        adj[a->second].push_back({b->second, e});
        adj[b->second].push_back({a->second, e});
    }
    std::vector<int> parent(m, -2);
    std::vector<EdgeId> parent_edge(m, -1);
    parent[0] = -1;
    std::vector<int> stack{0};
    int reached = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (auto [w, e] : adj[v]) {
            if (parent[w] != -2) continue;
            parent[w] = v;
            parent_edge[w] = e;
            ++reached;
            stack.push_back(w);
        }
    }
    if (reached != m) throw GraphError("tree edges do not connect the node subset");
    return SpanningTree(graph, std::move(nodes), std::move(parent), std::move(parent_edge));
}

std::vector<EdgeId> SpanningTree::edges() const {
    std::vector<EdgeId> out;
    out.reserve(nodes_.empty() ? 0 : nodes_.size() - 1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (parent_[i] >= 0) out.push_back(parent_edge_[i]);
    }
    return out;
}

std::vector<char> SpanningTree::subtree_mask(int local) const {
    std::vector<char> mask(nodes_.size(), 0);
    mask[local] = 1;
    for (int v : order_) {
        if (v != local && parent_[v] >= 0 && mask[parent_[v]]) mask[v] = 1;
    }
    return mask;
}

bool SpanningTree::is_valid(const DualGraph& graph) const {
    if (&graph != graph_ && graph.node_count() != graph_->node_count()) return false;
    const std::size_t m = nodes_.size();
    if (m == 0 || order_.size() != m) return false;
    std::unordered_map<NodeId, int> index;
    for (std::size_t i = 0; i < m; ++i) {
        if (!index.emplace(nodes_[i], static_cast<int>(i)).second) return false;
    }
    std::size_t edge_count = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (parent_[i] < 0) continue;
        ++edge_count;
        const EdgeId e = parent_edge_[i];
        if (e < 0 || e >= graph.edge_count()) return false;
        const Edge& edge = graph.edge(e);
        const NodeId u = nodes_[i];
        const NodeId p = nodes_[parent_[i]];
        if (!((edge.a == u && edge.b == p) || (edge.a == p && edge.b == u))) return false;
    }
    // order_ covering every node from a single root rules out cycles and disconnection
    return edge_count + 1 == m;
}

UstSampler::UstSampler(const DualGraph& graph, std::vector<NodeId> nodes) : graph_(&graph), nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw GraphError("cannot draw a spanning tree of an empty node set");
    if (!is_connected_subset(graph, nodes_)) throw GraphError("node subset does not induce a connected subgraph");
    std::vector<int> local(graph.node_count(), -1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (local[nodes_[i]] >= 0) throw GraphError("node subset has duplicates");
        local[nodes_[i]] = static_cast<int>(i);
    }
    offsets_.assign(nodes_.size() + 1, 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        int count = 0;
        for (const Adjacency& adj : graph.neighbors(nodes_[i])) count += local[adj.node] >= 0;
        offsets_[i + 1] = offsets_[i] + count;
    }
    neighbor_.resize(offsets_.back());
    neighbor_edge_.resize(offsets_.back());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        int slot = offsets_[i];
        for (const Adjacency& adj : graph.neighbors(nodes_[i])) {
            if (local[adj.node] < 0) continue;
            neighbor_[slot] = local[adj.node];
            neighbor_edge_[slot] = adj.edge;
            ++slot;
        }
    }
}

SpanningTree UstSampler::sample(RandomSource& rng) const {
    const int m = static_cast<int>(nodes_.size());
    std::vector<char> in_tree(m, 0);
    std::vector<int> next(m, -1);  // slot into neighbor_ chosen on the last visit
    std::vector<int> parent(m, -1);
    std::vector<EdgeId> parent_edge(m, -1);
    in_tree[0] = 1;
    for (int start = 1; start < m; ++start) {
        // random walk until the tree is hit; overwriting next[] erases loops
        int u = start;
        while (!in_tree[u]) {
            const int degree = offsets_[u + 1] - offsets_[u];
            next[u] = offsets_[u] + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(degree)));
            u = neighbor_[next[u]];
        }
        u = start;
        while (!in_tree[u]) {
            in_tree[u] = 1;
            parent[u] = neighbor_[next[u]];
            parent_edge[u] = neighbor_edge_[next[u]];
            u = parent[u];
        }
    }
    return SpanningTree(*graph_, nodes_, std::move(parent), std::move(parent_edge));
}

SpanningTree wilson_ust(const DualGraph& graph, std::span<const NodeId> nodes, RandomSource& rng) {
    return UstSampler(graph, std::vector<NodeId>(nodes.begin(), nodes.end())).sample(rng);
}

bool within_tolerance(double weight, double ideal, double epsilon) {
    return std::abs(weight - ideal) <= epsilon * ideal + 1e-12 * std::abs(ideal);
}

std::vector<int> find_balanced_cut_children(const SpanningTree& tree, double ideal, double epsilon) {
    std::vector<int> out;
    const auto subtree = tree.subtree_weights();
    const double total = static_cast<double>(tree.total_weight());
    for (int v : tree.top_down_order()) {
        if (tree.parent(v) < 0) continue;
        const double below = static_cast<double>(subtree[v]);
        if (within_tolerance(below, ideal, epsilon) && within_tolerance(total - below, ideal, epsilon)) {
            out.push_back(v);
        }
    }
    return out;
}

std::vector<EdgeId> find_balanced_cuts(const SpanningTree& tree, double ideal, double epsilon) {
    std::vector<EdgeId> out;
    for (int v : find_balanced_cut_children(tree, ideal, epsilon)) out.push_back(tree.parent_edge(v));
    return out;
}

}  // namespace dchain
