#pragma once

#include <cstdint>
#include <optional>

#include "dchain/constraints.hpp"
#include "dchain/partition.hpp"
#include "dchain/random.hpp"

namespace dchain {

/// Result of one flip-family step applied in place.
struct FlipStepResult {
    /// Steps credited to the state held before this transition (>= 1).
    std::uint64_t wait = 1;
    bool accepted = false;
    std::optional<FlipMove> move;
};

/// Value form of a flip-family step. When `accepted` is false, `next`
/// equals the input partition.
struct FlipProposalOutcome {
    Partition next;
    std::uint64_t wait = 1;
    bool accepted = false;
};

/// Draw a (node, district) pair uniformly from the distinct pairs
/// {(v, P(w)) : (v, w) cut}. The move is returned rather than applied since
/// it may leave the shrinking district disconnected or empty. Throws
/// PartitionError when there are no cut edges.
FlipMove node_choice(const Partition& partition, RandomSource& rng);

/// Rejection-sampled Flip: redraw node_choice until C(Q) holds, then apply.
/// `retry_ceiling` defaults to 10 * pair count; exceeding it throws StuckChainError.
FlipMove flip_advance(Partition& partition, const ConstraintSet& constraints, RandomSource& rng,
                      std::optional<std::size_t> retry_ceiling = std::nullopt);
Partition flip_step(const Partition& partition, const ConstraintSet& constraints, RandomSource& rng,
                    std::optional<std::size_t> retry_ceiling = std::nullopt);

/// Proposal probability p = pairs / (M * |V|) for self-loop scale M.
/// Throws ConfigError when p >= 1 (M too small for this state).
double uniform_flip_move_probability(const Partition& partition, double max_degree);

/// Lazy Uniform Flip: with probability 1 - p stay; otherwise draw one
/// node_choice proposal and move iff it satisfies C. A rejected proposal is
/// also a stay, which keeps the transition matrix symmetric so the uniform
/// distribution over the valid space is stationary. wait is always 1.
FlipStepResult uniform_flip_advance(Partition& partition, const ConstraintSet& constraints, double max_degree,
                                    RandomSource& rng);
FlipProposalOutcome uniform_flip_step(const Partition& partition, const ConstraintSet& constraints,
                                      double max_degree, RandomSource& rng);

/// Uniform Flip with the self-loops collapsed: the wait is the number of lazy
/// steps up to and including the first proposal, P(wait = j) = (1-p)^(j-1) p,
/// after which one node_choice proposal is applied iff it satisfies C.
/// Counting every state `wait` times reproduces the lazy chain's occupancy.
FlipStepResult uniform_flip_fast_advance(Partition& partition, const ConstraintSet& constraints,
                                         double max_degree, RandomSource& rng);
FlipProposalOutcome uniform_flip_fast_step(const Partition& partition, const ConstraintSet& constraints,
                                           double max_degree, RandomSource& rng);

/// Default self-loop scale 2|E|: every edge contributes at most two pairs.
double default_max_degree(const DualGraph& graph);

}  // namespace dchain
