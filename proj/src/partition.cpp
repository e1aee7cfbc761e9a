#include "dchain/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dchain/error.hpp"

namespace dchain {

std::vector<int> IndexedSet::sorted() const {
    std::vector<int> out(items_.begin(), items_.end());
    std::sort(out.begin(), out.end());
    return out;
}

Partition::Partition(std::shared_ptr<const DualGraph> graph, std::vector<District> assignment, int k)
    : graph_(std::move(graph)), k_(k), assignment_(std::move(assignment)) {
    if (!graph_) throw PartitionError("partition requires a graph");
    const int n = graph_->node_count();
    if (static_cast<int>(assignment_.size()) != n) {
        throw PartitionError("assignment has " + std::to_string(assignment_.size()) + " labels for " +
                             std::to_string(n) + " nodes");
    }
    if (k_ < 1) throw PartitionError("district count must be at least 1");

    district_population_.assign(k_ + 1, 0);
    district_size_.assign(k_ + 1, 0);
    for (NodeId v = 0; v < n; ++v) {
        const District d = assignment_[v];
        if (d < 1 || d > k_) {
            throw PartitionError("node '" + graph_->external_id(v) + "' has label " + std::to_string(d) +
                                 " outside 1.." + std::to_string(k_));
        }
        district_population_[d] += graph_->population(v);
        ++district_size_[d];
    }
    for (District d = 1; d <= k_; ++d) {
        if (district_size_[d] == 0) throw EmptyDistrictError("district " + std::to_string(d) + " is empty");
    }

    cut_edges_ = IndexedSet(graph_->edge_count());
    cut_degree_.assign(n, 0);
    boundary_nodes_ = IndexedSet(n);
    neighbor_count_.assign(static_cast<std::size_t>(n) * (k_ + 1), 0);
    pairs_ = IndexedSet(static_cast<std::size_t>(n) * (k_ + 1));

    for (EdgeId e = 0; e < graph_->edge_count(); ++e) {
        const Edge& edge = graph_->edge(e);
        ++neighbor_count_[index(edge.a, assignment_[edge.b])];
        ++neighbor_count_[index(edge.b, assignment_[edge.a])];
        if (assignment_[edge.a] != assignment_[edge.b]) {
            cut_edges_.insert(e);
            ++cut_degree_[edge.a];
            ++cut_degree_[edge.b];
        }
    }
    for (NodeId v = 0; v < n; ++v) {
        if (cut_degree_[v] > 0) boundary_nodes_.insert(v);
        for (District d = 1; d <= k_; ++d) refresh_pair(v, d);
    }
}

FlipMove Partition::pair(std::size_t i) const {
    const auto id = static_cast<std::size_t>(pairs_[i]);
    const auto v = static_cast<NodeId>(id / static_cast<std::size_t>(k_ + 1));
    const auto d = static_cast<District>(id % static_cast<std::size_t>(k_ + 1));
    return {v, assignment_[v], d};
}

int Partition::cut_delta(NodeId v, District d) const {
    return neighbors_in(v, assignment_[v]) - neighbors_in(v, d);
}

void Partition::refresh_pair(NodeId v, District d) {
    const auto id = static_cast<int>(index(v, d));
    if (d != assignment_[v] && neighbor_count_[index(v, d)] > 0) {
        pairs_.insert(id);
    } else {
        pairs_.erase(id);
    }
}

void Partition::relabel(NodeId v, District d) {
    const District from = assignment_[v];
    if (from == d) return;
    const std::int64_t pop = graph_->population(v);
    district_population_[from] -= pop;
    district_population_[d] += pop;
    --district_size_[from];
    ++district_size_[d];
    assignment_[v] = d;

    for (const Adjacency& adj : graph_->neighbors(v)) {
        const NodeId w = adj.node;
        const bool was_cut = assignment_[w] != from;
        const bool now_cut = assignment_[w] != d;
        if (was_cut && !now_cut) {
            cut_edges_.erase(adj.edge);
            --cut_degree_[v];
            --cut_degree_[w];
        } else if (!was_cut && now_cut) {
            cut_edges_.insert(adj.edge);
            ++cut_degree_[v];
            ++cut_degree_[w];
        }
        --neighbor_count_[index(w, from)];
        ++neighbor_count_[index(w, d)];
        if (cut_degree_[w] > 0) {
            boundary_nodes_.insert(w);
        } else {
            boundary_nodes_.erase(w);
        }
        refresh_pair(w, from);
        refresh_pair(w, d);
    }
    if (cut_degree_[v] > 0) {
        boundary_nodes_.insert(v);
    } else {
        boundary_nodes_.erase(v);
    }
    refresh_pair(v, from);
    refresh_pair(v, d);
}

void Partition::flip(NodeId v, District d) {
    if (v < 0 || v >= node_count()) throw std::out_of_range("flip: node out of range");
    if (d < 1 || d > k_) throw std::out_of_range("flip: district out of range");
    if (assignment_[v] == d) throw std::invalid_argument("flip: node already has that label");
    if (district_size_[assignment_[v]] == 1) {
        throw EmptyDistrictError("flip would empty district " + std::to_string(assignment_[v]));
    }
    relabel(v, d);
}

void Partition::reassign(std::span<const NodeId> nodes, std::span<const District> labels) {
    if (nodes.size() != labels.size()) throw std::invalid_argument("reassign: size mismatch");
    std::vector<int> sizes = district_size_;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (labels[i] < 1 || labels[i] > k_) throw std::out_of_range("reassign: district out of range");
        --sizes[assignment_[nodes[i]]];
        ++sizes[labels[i]];
    }
    for (District d = 1; d <= k_; ++d) {
        if (sizes[d] <= 0) throw EmptyDistrictError("reassignment would empty district " + std::to_string(d));
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) relabel(nodes[i], labels[i]);
}

std::vector<NodeId> Partition::district_nodes(District d) const {
    std::vector<NodeId> out;
    out.reserve(district_size_[d]);
    for (NodeId v = 0; v < node_count(); ++v) {
        if (assignment_[v] == d) out.push_back(v);
    }
    return out;
}

bool Partition::matches_recomputation() const {
    const Partition fresh(graph_, assignment_, k_);
    return fresh == *this && fresh.cut_degree_ == cut_degree_ && fresh.neighbor_count_ == neighbor_count_;
}

std::vector<District> Partition::canonical_assignment() const { return canonicalize(assignment_); }

bool operator==(const Partition& lhs, const Partition& rhs) {
    return lhs.graph_.get() == rhs.graph_.get() && lhs.k_ == rhs.k_ && lhs.assignment_ == rhs.assignment_ &&
           lhs.district_population_ == rhs.district_population_ && lhs.district_size_ == rhs.district_size_ &&
           lhs.cut_edges_.sorted() == rhs.cut_edges_.sorted() &&
           lhs.boundary_nodes_.sorted() == rhs.boundary_nodes_.sorted() && lhs.pairs_.sorted() == rhs.pairs_.sorted();
}

Partition apply_flip(const Partition& partition, NodeId node, District new_district) {
    Partition next = partition;
    next.flip(node, new_district);
    return next;
}

std::size_t cut_edge_count(const Partition& partition) { return partition.cut_edges().size(); }

double boundary_node_fraction(const Partition& partition) {
    return static_cast<double>(partition.boundary_nodes().size()) / partition.node_count();
}

double cut_edge_fraction(const Partition& partition) {
    const int edges = partition.graph().edge_count();
    return edges == 0 ? 0.0 : static_cast<double>(partition.cut_edges().size()) / edges;
}

bool is_contiguous(const DualGraph& graph, std::span<const District> assignment, int k) {
    const int n = graph.node_count();
    std::vector<int> size(k + 1, 0);
    std::vector<NodeId> first(k + 1, -1);
    for (NodeId v = 0; v < n; ++v) {
        ++size[assignment[v]];
        if (first[assignment[v]] < 0) first[assignment[v]] = v;
    }
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack;
    for (District d = 1; d <= k; ++d) {
        if (first[d] < 0) continue;
        int reached = 1;
        seen[first[d]] = 1;
        stack.assign(1, first[d]);
        while (!stack.empty()) {
            const NodeId v = stack.back();
            stack.pop_back();
            for (const Adjacency& adj : graph.neighbors(v)) {
                if (!seen[adj.node] && assignment[adj.node] == d) {
                    seen[adj.node] = 1;
                    ++reached;
                    stack.push_back(adj.node);
                }
            }
        }
        if (reached != size[d]) return false;
    }
    return true;
}

bool is_contiguous(const Partition& partition) {
    return is_contiguous(partition.graph(), partition.assignment(), partition.k());
}

bool stays_connected_without(const Partition& partition, NodeId removed) {
    const DualGraph& graph = partition.graph();
    const District d = partition[removed];
    if (partition.district_size(d) <= 2) return true;

    // Generation-stamped scratch shared by all partitions on this thread; each
    // call uses two fresh stamps (neighbor targets, visited).
    thread_local std::vector<std::uint32_t> stamp;
    thread_local std::uint32_t generation = 0;
    thread_local std::vector<NodeId> queue;
    if (stamp.size() < static_cast<std::size_t>(graph.node_count())) stamp.assign(graph.node_count(), 0);
    if (generation >= 0xfffffff0u) {
        std::fill(stamp.begin(), stamp.end(), 0);
        generation = 0;
    }
    const std::uint32_t target = ++generation;
    const std::uint32_t visited = ++generation;

    int targets = 0;
    NodeId start = -1;
    for (const Adjacency& adj : graph.neighbors(removed)) {
        if (partition[adj.node] == d && stamp[adj.node] != target) {
            stamp[adj.node] = target;
            ++targets;
            start = adj.node;
        }
    }
    if (targets <= 1) return targets == 1;

    stamp[removed] = visited;
    stamp[start] = visited;
    int found = 1;
    queue.clear();
    queue.push_back(start);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId v = queue[head];
        for (const Adjacency& adj : graph.neighbors(v)) {
            const NodeId w = adj.node;
            if (partition[w] != d || stamp[w] == visited) continue;
            if (stamp[w] == target && ++found == targets) return true;
            stamp[w] = visited;
            queue.push_back(w);
        }
    }
    return false;
}

double population_deviation(std::span<const std::int64_t> district_pops) {
    if (district_pops.empty()) return 0.0;
    std::int64_t total = 0;
    for (std::int64_t p : district_pops) total += p;
    const double ideal = static_cast<double>(total) / static_cast<double>(district_pops.size());
    if (ideal == 0.0) return 0.0;
    double worst = 0.0;
    for (std::int64_t p : district_pops) worst = std::max(worst, std::abs(static_cast<double>(p) - ideal) / ideal);
    return worst;
}

double population_deviation(const Partition& partition) {
    return population_deviation(partition.district_populations().subspan(1));
}

double assignment_overlap(std::span<const District> a, std::span<const District> b) {
    if (a.size() != b.size()) throw std::invalid_argument("assignment_overlap: size mismatch");
    if (a.empty()) return 1.0;
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
    return static_cast<double>(same) / static_cast<double>(a.size());
}

std::vector<District> canonicalize(std::span<const District> assignment) {
    std::vector<District> relabel;
    std::vector<District> out(assignment.size());
    District next = 0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        const District d = assignment[i];
        if (d >= static_cast<District>(relabel.size())) relabel.resize(d + 1, 0);
        if (relabel[d] == 0) relabel[d] = ++next;
        out[i] = relabel[d];
    }
    return out;
}

std::vector<District> stripes_assignment(int rows, int cols, int k) {
    if (k < 1 || cols % k != 0) {
        throw PartitionError(std::to_string(cols) + " columns cannot be split into " + std::to_string(k) +
                             " equal stripes");
    }
    const int width = cols / k;
    std::vector<District> out(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) out[static_cast<std::size_t>(r) * cols + c] = c / width + 1;
    }
    return out;
}

void write_assignment_csv(const Partition& partition, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw PartitionError("cannot write assignment file " + path.string());
    out << "node_id,district\n";
    for (NodeId v = 0; v < partition.node_count(); ++v) {
        const std::string& id = partition.graph().external_id(v);
        if (id.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : id) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
            out << quoted << "\"," << partition[v] << '\n';
        } else {
            out << id << ',' << partition[v] << '\n';
        }
    }
}

std::pair<std::vector<District>, int> read_assignment_csv(const DualGraph& graph, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PartitionError("cannot open assignment file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw PartitionError("assignment file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "node_id,district") throw PartitionError("assignment header must be 'node_id,district'");

    std::vector<District> labels(graph.node_count(), kUnassigned);
    int k = 0;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string id;
        std::size_t pos = 0;
        if (line.front() == '"') {
            for (pos = 1; pos < line.size(); ++pos) {
                if (line[pos] == '"') {
                    if (pos + 1 < line.size() && line[pos + 1] == '"') {
                        id += '"';
                        ++pos;
                    } else {
                        break;
                    }
                } else {
                    id += line[pos];
                }
            }
            pos = line.find(',', pos);
        } else {
            pos = line.rfind(',');
            if (pos != std::string::npos) id = line.substr(0, pos);
        }
        if (pos == std::string::npos) throw PartitionError("malformed assignment row " + std::to_string(row));
        const auto node = graph.find(id);
        if (!node) throw PartitionError("assignment row " + std::to_string(row) + " names unknown node '" + id + "'");
        if (labels[*node] != kUnassigned) throw PartitionError("node '" + id + "' assigned twice");
        District d = 0;
        try {
            d = std::stoi(line.substr(pos + 1));
        } catch (const std::exception&) {
            throw PartitionError("malformed district label on row " + std::to_string(row));
        }
        if (d < 1) throw PartitionError("district labels must be positive (row " + std::to_string(row) + ")");
        labels[*node] = d;
        k = std::max(k, d);
    }
    for (NodeId v = 0; v < graph.node_count(); ++v) {
        if (labels[v] == kUnassigned) throw PartitionError("node '" + graph.external_id(v) + "' has no district");
    }
    return {std::move(labels), k};
}

}  // namespace dchain
