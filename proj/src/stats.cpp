#include "dchain/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "dchain/error.hpp"

namespace dchain {

ElectionSpec ElectionSpec::complement_of_population(std::string party_a_column) {
    ElectionSpec spec;
    spec.party_a_column = std::move(party_a_column);
    spec.party_b_column.clear();
    spec.b_is_complement = true;
    return spec;
}

std::pair<std::vector<double>, std::vector<double>> district_votes(const Partition& partition,
                                                                   const ElectionSpec& election) {
    const DualGraph& graph = partition.graph();
    const auto a = graph.attribute(election.party_a_column);
    std::vector<double> votes_a(partition.k() + 1, 0.0);
    std::vector<double> votes_b(partition.k() + 1, 0.0);
    if (election.b_is_complement) {
        for (NodeId v = 0; v < graph.node_count(); ++v) {
            votes_a[partition[v]] += a[v];
            votes_b[partition[v]] += static_cast<double>(graph.population(v)) - a[v];
        }
    } else {
        const auto b = graph.attribute(election.party_b_column);
        for (NodeId v = 0; v < graph.node_count(); ++v) {
            votes_a[partition[v]] += a[v];
            votes_b[partition[v]] += b[v];
        }
    }
    return {votes_a, votes_b};
}

SeatCount seat_count(const Partition& partition, const ElectionSpec& election) {
    const auto [a, b] = district_votes(partition, election);
    SeatCount count;
    for (District d = 1; d <= partition.k(); ++d) {
        if (a[d] > b[d]) {
            ++count.won;
        } else if (a[d] < b[d]) {
            ++count.lost;
        } else {
            ++count.tied;
        }
    }
    return count;
}

int seats_won(const Partition& partition, const ElectionSpec& election) { return seat_count(partition, election).won; }

namespace {

std::vector<double> sorted_ratios(const std::vector<double>& num, const std::vector<double>& den, int k) {
    std::vector<double> shares;
    shares.reserve(k);
    for (District d = 1; d <= k; ++d) {
        if (den[d] == 0.0) throw PartitionError("district " + std::to_string(d) + " has zero denominator");
        shares.push_back(num[d] / den[d]);
    }
    std::sort(shares.begin(), shares.end());
    return shares;
}

}  // namespace

std::vector<double> district_shares(const Partition& partition, const std::string& numerator_column,
                                    const std::string& denominator_column) {
    const DualGraph& graph = partition.graph();
    const auto num = graph.attribute(numerator_column);
    const auto den = graph.attribute(denominator_column);
    std::vector<double> n(partition.k() + 1, 0.0);
    std::vector<double> d(partition.k() + 1, 0.0);
    for (NodeId v = 0; v < graph.node_count(); ++v) {
        n[partition[v]] += num[v];
        d[partition[v]] += den[v];
    }
    return sorted_ratios(n, d, partition.k());
}

std::vector<double> vote_shares(const Partition& partition, const ElectionSpec& election) {
    auto [a, b] = district_votes(partition, election);
    for (std::size_t d = 0; d < a.size(); ++d) b[d] += a[d];
    return sorted_ratios(a, b, partition.k());
}

double median(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty vector");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean_median(std::span<const double> shares) {
    if (shares.empty()) throw std::invalid_argument("mean-median of an empty vector");
    const double mean = std::accumulate(shares.begin(), shares.end(), 0.0) / static_cast<double>(shares.size());
    return median(shares) - mean;
}

int units_split(const Partition& partition, const std::string& unit_column) {
    const auto unit = partition.graph().attribute(unit_column);
    std::unordered_map<double, District> first;
    std::set<double> split;
    for (NodeId v = 0; v < partition.node_count(); ++v) {
        auto [it, inserted] = first.emplace(unit[v], partition[v]);
        if (!inserted && it->second != partition[v]) split.insert(unit[v]);
    }
    return static_cast<int>(split.size());
}

double log_spanning_tree_count(const DualGraph& graph, std::span<const NodeId> nodes) {
    if (!is_connected_subset(graph, nodes)) throw GraphError("spanning trees of a disconnected or empty subgraph");
    const int m = static_cast<int>(nodes.size());
    if (m == 1) return 0.0;
    std::vector<int> local(graph.node_count(), -1);
    for (int i = 0; i < m; ++i) local[nodes[i]] = i;

    // Laplacian with row/column of local node 0 removed
    std::vector<Eigen::Triplet<double>> entries;
    std::vector<double> diagonal(m, 0.0);
    for (int i = 0; i < m; ++i) {
        for (const Adjacency& adj : graph.neighbors(nodes[i])) {
            const int j = local[adj.node];
            if (j < 0) continue;
            diagonal[i] += 1.0;
            if (i > 0 && j > 0) entries.emplace_back(i - 1, j - 1, -1.0);
        }
    }
    for (int i = 1; i < m; ++i) entries.emplace_back(i - 1, i - 1, diagonal[i]);
    Eigen::SparseMatrix<double> minor(m - 1, m - 1);
    minor.setFromTriplets(entries.begin(), entries.end());

    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> cholesky(minor);
    if (cholesky.info() != Eigen::Success) throw GraphError("Laplacian minor is not positive definite");
    double log_det = 0.0;
    const auto& factor = cholesky.matrixL();
    const Eigen::SparseMatrix<double> lower = factor;
    for (int i = 0; i < m - 1; ++i) log_det += 2.0 * std::log(lower.coeff(i, i));
    return log_det;
}

double log_spanning_tree_count(const DualGraph& graph) {
    std::vector<NodeId> all(graph.node_count());
    std::iota(all.begin(), all.end(), 0);
    return log_spanning_tree_count(graph, all);
}

BigInt spanning_tree_count_exact(int node_count, std::span<const Edge> edges) {
    if (node_count <= 0) throw GraphError("spanning trees of an empty graph");
    if (node_count == 1) return 1;
    const int m = node_count - 1;
    std::vector<BigInt> a(static_cast<std::size_t>(m) * m, 0);
    auto at = [&](int i, int j) -> BigInt& { return a[static_cast<std::size_t>(i) * m + j]; };
    for (const Edge& e : edges) {
        if (e.a < 0 || e.b < 0 || e.a >= node_count || e.b >= node_count || e.a == e.b) {
            throw GraphError("edge endpoint out of range or self-loop");
        }
        const int u = e.a - 1;
        const int v = e.b - 1;
        if (u >= 0) at(u, u) += 1;
        if (v >= 0) at(v, v) += 1;
        if (u >= 0 && v >= 0) {
            at(u, v) -= 1;
            at(v, u) -= 1;
        }
    }
    // Bareiss: every intermediate quotient is exact
    BigInt previous = 1;
    int sign = 1;
    for (int p = 0; p < m; ++p) {
        if (at(p, p) == 0) {
            int swap_row = -1;
            for (int r = p + 1; r < m; ++r) {
                if (at(r, p) != 0) {
                    swap_row = r;
                    break;
                }
            }
            if (swap_row < 0) return 0;
            for (int c = 0; c < m; ++c) std::swap(at(p, c), at(swap_row, c));
            sign = -sign;
        }
        for (int r = p + 1; r < m; ++r) {
            for (int c = p + 1; c < m; ++c) {
                at(r, c) = (at(r, c) * at(p, p) - at(r, p) * at(p, c)) / previous;
            }
            at(r, p) = 0;
        }
        previous = at(p, p);
    }
    BigInt det = at(m - 1, m - 1);
    return sign < 0 ? BigInt(-det) : det;
}

BigInt spanning_tree_count_exact(const DualGraph& graph, std::span<const NodeId> nodes) {
    std::vector<int> local(graph.node_count(), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (local[nodes[i]] >= 0) throw GraphError("node subset has duplicates");
        local[nodes[i]] = static_cast<int>(i);
    }
    std::vector<Edge> induced;
    for (const Edge& e : graph.edges()) {
        if (local[e.a] >= 0 && local[e.b] >= 0) induced.push_back({local[e.a], local[e.b], e.weight});
    }
    return spanning_tree_count_exact(static_cast<int>(nodes.size()), induced);
}

double log_partition_tree_score(const Partition& partition) {
    if (!is_contiguous(partition)) throw PartitionError("tree score needs a contiguous partition");
    double score = 0.0;
    for (District d = 1; d <= partition.k(); ++d) {
        score += log_spanning_tree_count(partition.graph(), partition.district_nodes(d));
    }
    if (partition.k() == 2) score += std::log(static_cast<double>(partition.cut_edges().size()));
    return score;
}

}  // namespace dchain
