#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dchain/partition.hpp"
#include "dchain/random.hpp"
#include "dchain/spanning_tree.hpp"

namespace dchain {

enum class PairWeighting {
    /// Uniform cut edge; adjacent district pairs weighted by shared cut-edge count.
    CutEdges,
    /// Uniform over adjacent district pairs.
    DistrictPairs,
};

struct RecomConfig {
    /// Each new district within (1 +- epsilon) of the merged population / 2.
    double epsilon = 0.05;
    PairWeighting pair_weighting = PairWeighting::CutEdges;
    int max_tree_redraws = 1000;
    /// Districts merged per step by recom_general.
    int merge_count = 2;

    /// Throws ConfigError unless 0 <= epsilon < 1, redraws >= 1, merge_count >= 2.
    void validate() const;
};

struct RecomChange {
    District first;
    District second;
    int tree_draws = 0;
};

/// Spanning-tree recombination on two adjacent districts, in place: pick the
/// pair, draw uniform spanning trees of their union until one has a balanced
/// cut, cut a uniformly chosen balanced edge, and give each side one of the
/// two labels by a fair coin. Throws InfeasibleMergeError after
/// `max_tree_redraws` trees without a balanced cut.
RecomChange recom_advance(Partition& partition, const RecomConfig& config, RandomSource& rng);
Partition recom_step(const Partition& partition, const RecomConfig& config, RandomSource& rng);

/// Splits `region` into `parts` pieces given as part index per region node
/// (0-based, region order), or nullopt when it gives up.
using RegionPartitioner =
    std::function<std::optional<std::vector<int>>(const DualGraph&, std::span<const NodeId>, int, RandomSource&)>;

struct TreePartitionOptions {
    /// Trees drawn per split before restarting from the whole region.
    int max_tree_draws = 1000;
    /// Complete restarts before giving up.
    int max_restarts = 50;
};

/// Recursive spanning-tree partition of a connected region into `parts`
/// connected pieces, each within (1 +- epsilon) * pop(region) / parts. Each
/// split draws a uniform tree of what remains and cuts off one piece of
/// admissible population (chosen uniformly among admissible edge/side
/// choices) whose complement can still hold the remaining pieces; the last
/// split is exactly the balanced bipartition used by recom_step.
/// Returns nullopt once the restart budget is spent.
std::optional<std::vector<int>> tree_partition(const DualGraph& graph, std::span<const NodeId> region, int parts,
                                               double epsilon, RandomSource& rng,
                                               const TreePartitionOptions& options = {});

RegionPartitioner spanning_tree_partitioner(double epsilon, TreePartitionOptions options = {});

/// General recombination: select `merge_count` districts (a uniform cut edge
/// gives the first two, then uniform cut edges leaving the selection add one
/// at a time), hand their union to the partitioner and relabel with the
/// selected labels in ascending order. merge_count == k regenerates the
/// whole plan. Throws PartitionError if the union is disconnected and
/// InfeasibleMergeError if the partitioner gives up.
std::vector<District> recom_general_advance(Partition& partition, int merge_count,
                                             const RegionPartitioner& partitioner, RandomSource& rng);
Partition recom_general(const Partition& partition, int merge_count, const RegionPartitioner& partitioner,
                        RandomSource& rng);

struct Seed {
    Partition partition;
    /// Failed attempts before the returned plan.
    int restarts = 0;
};

/// Contiguous k-partition with every district within (1 +- epsilon) * total/k
/// from recursive spanning-tree splitting. Throws SeedError when the retry
/// budget runs out.
Seed recursive_tree_seed(std::shared_ptr<const DualGraph> graph, int k, double epsilon, RandomSource& rng,
                         const TreePartitionOptions& options = {});

/// Greedy agglomerative seed: k random seed nodes grow, smallest population
/// first, by absorbing a random unassigned neighbor; a plan that strands a
/// district below tolerance or overfills one is abandoned and restarted.
/// Throws SeedError after `max_restarts` abandoned plans.
Seed flood_fill_seed(std::shared_ptr<const DualGraph> graph, int k, double epsilon, RandomSource& rng,
                     int max_restarts = 10000);

}  // namespace dchain
