#pragma once

#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dchain/partition.hpp"

namespace dchain {

/// Two-party election read from attribute columns. In complement mode party
/// B's votes are the node population minus party A's.
struct ElectionSpec {
    std::string party_a_column = "A";
    std::string party_b_column = "B";
    bool b_is_complement = false;

    static ElectionSpec complement_of_population(std::string party_a_column);
};

struct SeatCount {
    int won = 0;
    int lost = 0;
    int tied = 0;
};

/// Per-district vote totals for both parties, indexed by label (entry 0 unused).
std::pair<std::vector<double>, std::vector<double>> district_votes(const Partition& partition,
                                                                   const ElectionSpec& election);

/// Districts where A strictly beats B; exact ties are neither won nor lost.
SeatCount seat_count(const Partition& partition, const ElectionSpec& election);
int seats_won(const Partition& partition, const ElectionSpec& election);

/// numerator / denominator summed per district, ascending. Throws
/// PartitionError naming the district when a denominator sum is zero.
std::vector<double> district_shares(const Partition& partition, const std::string& numerator_column,
                                    const std::string& denominator_column);
/// Party A share of the two-party vote per district, ascending.
std::vector<double> vote_shares(const Partition& partition, const ElectionSpec& election);

double median(std::span<const double> values);
/// median - mean. Throws std::invalid_argument on an empty vector.
double mean_median(std::span<const double> shares);

/// Number of unit ids (attribute values) whose nodes lie in two or more districts.
int units_split(const Partition& partition, const std::string& unit_column);

/// Natural log of the number of spanning trees of the subgraph induced on
/// `nodes`, from a sparse Cholesky factorization of a first Laplacian minor.
/// Throws GraphError if the induced subgraph is empty or disconnected.
double log_spanning_tree_count(const DualGraph& graph, std::span<const NodeId> nodes);
double log_spanning_tree_count(const DualGraph& graph);

using BigInt = boost::multiprecision::cpp_int;

/// Exact spanning-tree count of an arbitrary simple graph on `node_count`
/// nodes by fraction-free (Bareiss) elimination; zero when disconnected.
BigInt spanning_tree_count_exact(int node_count, std::span<const Edge> edges);
BigInt spanning_tree_count_exact(const DualGraph& graph, std::span<const NodeId> nodes);

/// Sum of per-district log spanning-tree counts, plus ln |cut edges| when
/// k = 2. For k > 2 the cross-edge factor is left out. Throws PartitionError
/// for non-contiguous plans.
double log_partition_tree_score(const Partition& partition);

}  // namespace dchain
