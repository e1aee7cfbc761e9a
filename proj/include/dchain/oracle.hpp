#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dchain/constraints.hpp"
#include "dchain/partition.hpp"
#include "dchain/stats.hpp"

namespace dchain {

/// Every constraint-satisfying k-partition of a small graph, stored with
/// labels canonicalized by first occurrence.
class StateSpace {
public:
    StateSpace(std::shared_ptr<const DualGraph> graph, int k, std::vector<std::vector<District>> states);

    const DualGraph& graph() const { return *graph_; }
    const std::shared_ptr<const DualGraph>& graph_ptr() const { return graph_; }
    int k() const { return k_; }
    std::size_t size() const { return states_.size(); }
    const std::vector<District>& state(std::size_t i) const { return states_[i]; }
    std::span<const std::vector<District>> states() const { return states_; }
    Partition partition(std::size_t i) const;

    /// State id of any labeling of a stored partition.
    std::optional<std::size_t> find(std::span<const District> assignment) const;
    std::optional<std::size_t> find(const Partition& partition) const { return find(partition.assignment()); }

private:
    std::shared_ptr<const DualGraph> graph_;
    int k_;
    std::vector<std::vector<District>> states_;
    std::map<std::vector<District>, std::size_t> index_;
};

/// Raw labelings k^n allowed before enumerate_partitions refuses.
inline constexpr double kEnumerationGuard = 5e6;

/// All partitions passing `constraints`, each listed once. Throws
/// SizeGuardError when k^n exceeds the guard.
StateSpace enumerate_partitions(std::shared_ptr<const DualGraph> graph, int k, const ConstraintSet& constraints,
                                double guard = kEnumerationGuard);

/// Dense row-stochastic matrix over a StateSpace.
class TransitionMatrix {
public:
    explicit TransitionMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

    /// Largest |row sum - 1|.
    double max_row_error() const;
    bool has_negative_entry() const;

private:
    std::size_t n_;
    std::vector<double> data_;
};

struct FlipVariant {
    enum class Kind {
        /// Flip with rejection retries: uniform over valid single-node moves.
        Plain,
        /// Lazy chain, each valid move with probability 1/(M|V|), rest self-loop.
        UniformFlip,
        /// Lazy chain whose proposals retry until valid (rejections never stay).
        UniformFlipRetry,
    };
    Kind kind = Kind::Plain;
    double max_degree = 0.0;

    static FlipVariant plain() { return {Kind::Plain, 0.0}; }
    static FlipVariant uniform(double m) { return {Kind::UniformFlip, m}; }
    static FlipVariant uniform_retry(double m) { return {Kind::UniformFlipRetry, m}; }
};

/// Number of single-node relabelings of each state that land in the space
/// (the state's degree in the flip graph).
std::vector<std::size_t> flip_degrees(const StateSpace& space, const ConstraintSet& constraints);

/// Exact transition matrix of a flip-family chain restricted to the states
/// passing `constraints`. A state with no valid move gets a self-loop of 1.
/// Throws ConfigError for uniform variants if some state has p >= 1.
TransitionMatrix flip_matrix(const StateSpace& space, const ConstraintSet& constraints, const FlipVariant& variant);

/// Connected components of the graph of positive off-diagonal entries.
std::vector<int> chain_components(const TransitionMatrix& matrix);
int component_count(const TransitionMatrix& matrix);

/// Stationary vector from the uniform start by power iteration on the lazy
/// chain (I + X) / 2, accelerated by repeated squaring. For reducible chains
/// the result is the limit from the uniform start.
std::vector<double> stationary_distribution(const TransitionMatrix& matrix, double tolerance = 1e-15);

/// max_j |(pi X)_j - pi_j|.
double stationarity_error(const TransitionMatrix& matrix, std::span<const double> pi);

/// Every spanning tree of the graph as edge-id lists. Throws SizeGuardError
/// when the matrix-tree count exceeds `limit`.
std::vector<std::vector<EdgeId>> enumerate_spanning_trees(const DualGraph& graph, std::uint64_t limit = 2000000);

struct TreeCutSplit {
    /// Canonical assignment (labels 1, 2).
    std::vector<District> assignment;
    /// Probability that one recom_step on the whole graph produces this split.
    double probability = 0.0;
    /// Number of (tree, edge) pairs whose cut yields this split.
    std::uint64_t incidences = 0;
    /// tau(H1) * tau(H2) * |E(H1, H2)|.
    BigInt tree_product = 0;
};

struct TreeCutDistribution {
    std::vector<TreeCutSplit> splits;
    std::uint64_t tree_count = 0;
    /// Trees with at least one balanced edge.
    std::uint64_t cuttable_trees = 0;
};

/// Exact distribution of the spanning-tree bipartition of the whole graph:
/// a uniform tree, redrawn until it has a balanced edge, cut at a uniformly
/// chosen balanced edge. Ideal is total population / 2.
TreeCutDistribution tree_cut_distribution(const DualGraph& graph, double epsilon, std::uint64_t limit = 2000000);

/// Half the L1 distance. Throws std::invalid_argument on a length mismatch.
double total_variation(std::span<const double> p, std::span<const double> q);

/// Counts normalized to probabilities.
std::vector<double> normalize(std::span<const double> counts);

}  // namespace dchain
