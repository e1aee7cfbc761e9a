#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dchain/partition.hpp"
#include "dchain/random.hpp"

namespace dchain {

/// Upper bound on |cut edges|, either absolute or as a fraction of |E|.
struct CutEdgeCap {
    enum class Kind { Absolute, FractionOfEdges };
    Kind kind = Kind::Absolute;
    double value = 0.0;

    static CutEdgeCap absolute(std::size_t count) { return {Kind::Absolute, static_cast<double>(count)}; }
    static CutEdgeCap fraction(double f) { return {Kind::FractionOfEdges, f}; }

    /// Largest admissible cut-edge count on `graph`.
    double limit(const DualGraph& graph) const {
        return kind == Kind::Absolute ? value : value * graph.edge_count();
    }
};

struct NamedPredicate {
    std::string name;
    std::function<bool(const Partition&)> test;
};

/// Validity predicate C: the conjunction of every enabled check.
struct ConstraintSet {
    /// Every district within (1 +- tolerance) * total/k; disabled when empty.
    std::optional<double> pop_tolerance;
    std::optional<CutEdgeCap> cut_edge_cap;
    bool require_contiguity = true;
    std::vector<NamedPredicate> custom;

    bool check(const Partition& partition) const;

    /// C(Q) where Q is `partition` with `move` applied, evaluated from the
    /// touched districts only. Exact whenever `partition` itself satisfies C;
    /// a move that would empty a district is never valid. Custom predicates
    /// are evaluated on Q by applying and reverting the move in place, so the
    /// partition is unchanged on return.
    bool check_flip(Partition& partition, const FlipMove& move) const;

    /// Population test for a single district against total/k.
    bool population_ok(const DualGraph& graph, int k, std::int64_t district_pop) const;
};

bool check(const ConstraintSet& constraints, const Partition& partition);

/// Inverse-temperature schedule beta(step); the Metropolis base is x = 2^-beta.
class WeightSchedule {
public:
    enum class Kind { Constant, Linear };

    static WeightSchedule constant(double beta);
    /// beta0 up to start_step, beta1 from end_step, linear in between.
    static WeightSchedule linear(std::uint64_t start_step, std::uint64_t end_step, double beta0, double beta1);
    /// "const:B" or "lin:a,b,B0,B1"; a bare number means constant.
    static WeightSchedule parse(const std::string& text);

    double beta(std::uint64_t step) const;
    Kind kind() const { return kind_; }
    std::string describe() const;
    /// True when beta is identically zero (no weighting).
    bool is_unweighted() const { return kind_ == Kind::Constant && beta0_ == 0.0; }

private:
    Kind kind_ = Kind::Constant;
    std::uint64_t start_ = 0;
    std::uint64_t end_ = 0;
    double beta0_ = 0.0;
    double beta1_ = 0.0;
};

double anneal_beta(const WeightSchedule& schedule, std::uint64_t step);

/// Acceptance probability min(1, 2^(-beta * delta)) for a cut-edge change `delta`.
double metropolis_probability(long delta, double beta);
/// Accept with probability min(1, 2^(-beta * delta)); beta = 0 or delta <= 0
/// accepts without consuming randomness.
bool metropolis_accept(long delta, double beta, RandomSource& rng);
bool metropolis_accept(const Partition& current, const Partition& proposed, double beta, RandomSource& rng);

/// Replica-exchange probability min(1, 2^((beta_i - beta_j)(cut_i - cut_j))).
double exchange_probability(double beta_i, double beta_j, long cut_i, long cut_j);

/// One sweep of adjacent-temperature exchanges. Replicas are ordered by
/// their current beta; each neighboring pair in that order swaps betas with
/// the exchange probability. Returns the updated beta of every replica.
std::vector<double> tempering_swap(std::span<const long> cut_counts, std::vector<double> betas, RandomSource& rng);
std::vector<double> tempering_swap(std::span<const Partition> replicas, std::vector<double> betas, RandomSource& rng);

/// Same sweep on a fixed temperature ladder: `levels[i]` is replica i's rung
/// (a permutation of 0..R-1) and rung r runs at `ladder[r]`. Working with
/// rungs keeps replicas distinguishable while several rungs share a beta.
std::vector<int> tempering_swap_levels(std::span<const long> cut_counts, std::vector<int> levels,
                                       std::span<const double> ladder, RandomSource& rng);

}  // namespace dchain
