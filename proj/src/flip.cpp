#include "dchain/flip.hpp"

#include "dchain/error.hpp"

namespace dchain {

FlipMove node_choice(const Partition& partition, RandomSource& rng) {
    if (partition.pair_count() == 0) throw PartitionError("node choice needs at least one cut edge");
    return partition.pair(rng.uniform_index(partition.pair_count()));
}

FlipMove flip_advance(Partition& partition, const ConstraintSet& constraints, RandomSource& rng,
                      std::optional<std::size_t> retry_ceiling) {
    const std::size_t ceiling = retry_ceiling.value_or(10 * partition.pair_count());
    for (std::size_t attempt = 0; attempt < ceiling; ++attempt) {
        const FlipMove move = node_choice(partition, rng);
        if (constraints.check_flip(partition, move)) {
            partition.flip(move.node, move.to);
            return move;
        }
    }
    throw StuckChainError("flip: no valid proposal in " + std::to_string(ceiling) + " draws");
}

Partition flip_step(const Partition& partition, const ConstraintSet& constraints, RandomSource& rng,
                    std::optional<std::size_t> retry_ceiling) {
    Partition next = partition;
    flip_advance(next, constraints, rng, retry_ceiling);
    return next;
}

double uniform_flip_move_probability(const Partition& partition, double max_degree) {
    const double scale = max_degree * partition.node_count();
    const double p = static_cast<double>(partition.pair_count()) / scale;
    if (!(scale > 0.0) || p >= 1.0) {
        throw ConfigError("uniform flip: M = " + std::to_string(max_degree) + " is too small for " +
                          std::to_string(partition.pair_count()) + " boundary pairs");
    }
    return p;
}

FlipStepResult uniform_flip_advance(Partition& partition, const ConstraintSet& constraints, double max_degree,
                                    RandomSource& rng) {
    const double p = uniform_flip_move_probability(partition, max_degree);
    FlipStepResult result;
    if (!rng.bernoulli(p)) return result;
    const FlipMove move = node_choice(partition, rng);
    result.move = move;
    if (constraints.check_flip(partition, move)) {
        partition.flip(move.node, move.to);
        result.accepted = true;
    }
    return result;
}

FlipProposalOutcome uniform_flip_step(const Partition& partition, const ConstraintSet& constraints,
                                      double max_degree, RandomSource& rng) {
    Partition next = partition;
    const FlipStepResult r = uniform_flip_advance(next, constraints, max_degree, rng);
    return {std::move(next), r.wait, r.accepted};
}

FlipStepResult uniform_flip_fast_advance(Partition& partition, const ConstraintSet& constraints,
                                         double max_degree, RandomSource& rng) {
    const double p = uniform_flip_move_probability(partition, max_degree);
    if (p == 0.0) throw PartitionError("uniform flip needs at least one cut edge");
    FlipStepResult result;
    result.wait = rng.geometric(p);
    const FlipMove move = node_choice(partition, rng);
    result.move = move;
    if (constraints.check_flip(partition, move)) {
        partition.flip(move.node, move.to);
        result.accepted = true;
    }
    return result;
}

FlipProposalOutcome uniform_flip_fast_step(const Partition& partition, const ConstraintSet& constraints,
                                           double max_degree, RandomSource& rng) {
    Partition next = partition;
    const FlipStepResult r = uniform_flip_fast_advance(next, constraints, max_degree, rng);
    return {std::move(next), r.wait, r.accepted};
}

double default_max_degree(const DualGraph& graph) { return 2.0 * graph.edge_count(); }

}  // namespace dchain
