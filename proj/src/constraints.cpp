#include "dchain/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dchain/error.hpp"

namespace dchain {

bool ConstraintSet::population_ok(const DualGraph& graph, int k, std::int64_t district_pop) const {
    if (!pop_tolerance) return true;
    // |pop - total/k| <= tol * total/k, scaled by k to stay in integers where possible
    const double total = static_cast<double>(graph.total_population());
    const double scaled = static_cast<double>(k) * static_cast<double>(district_pop) - total;
    return std::abs(scaled) <= *pop_tolerance * total;
}

bool ConstraintSet::check(const Partition& partition) const {
    const DualGraph& graph = partition.graph();
    if (pop_tolerance) {
        for (District d = 1; d <= partition.k(); ++d) {
            if (!population_ok(graph, partition.k(), partition.district_population(d))) return false;
        }
    }
    if (cut_edge_cap && static_cast<double>(partition.cut_edges().size()) > cut_edge_cap->limit(graph)) return false;
    if (require_contiguity && !is_contiguous(partition)) return false;
    for (const auto& predicate : custom) {
        if (!predicate.test(partition)) return false;
    }
    return true;
}

bool ConstraintSet::check_flip(Partition& partition, const FlipMove& move) const {
    const DualGraph& graph = partition.graph();
    if (move.from == move.to || partition.district_size(move.from) <= 1) return false;
    if (pop_tolerance) {
        const std::int64_t pop = graph.population(move.node);
        if (!population_ok(graph, partition.k(), partition.district_population(move.from) - pop)) return false;
        if (!population_ok(graph, partition.k(), partition.district_population(move.to) + pop)) return false;
    }
    if (cut_edge_cap) {
        const double after = static_cast<double>(partition.cut_edges().size()) +
                             static_cast<double>(partition.cut_delta(move.node, move.to));
        if (after > cut_edge_cap->limit(graph)) return false;
    }
    // the receiving district stays connected: the node has a neighbor in it
    if (require_contiguity && partition.neighbors_in(move.node, move.to) == 0) return false;
    if (require_contiguity && !stays_connected_without(partition, move.node)) return false;
    if (!custom.empty()) {
        partition.flip(move.node, move.to);
        bool ok = true;
        for (const auto& predicate : custom) {
            if (!predicate.test(partition)) {
                ok = false;
                break;
            }
        }
        partition.flip(move.node, move.from);
        return ok;
    }
    return true;
}

bool check(const ConstraintSet& constraints, const Partition& partition) { return constraints.check(partition); }

WeightSchedule WeightSchedule::constant(double beta) {
    if (!(beta >= 0.0)) throw ConfigError("beta must be nonnegative");
    WeightSchedule s;
    s.kind_ = Kind::Constant;
    s.beta0_ = s.beta1_ = beta;
    return s;
}

WeightSchedule WeightSchedule::linear(std::uint64_t start_step, std::uint64_t end_step, double beta0, double beta1) {
    if (!(beta0 >= 0.0) || !(beta1 >= 0.0)) throw ConfigError("beta must be nonnegative");
    if (end_step < start_step) throw ConfigError("linear schedule must end after it starts");
    WeightSchedule s;
    s.kind_ = Kind::Linear;
    s.start_ = start_step;
    s.end_ = end_step;
    s.beta0_ = beta0;
    s.beta1_ = beta1;
    return s;
}

WeightSchedule WeightSchedule::parse(const std::string& text) {
    auto numbers = [&](const std::string& body) {
        std::vector<double> out;
        std::stringstream in(body);
        std::string item;
        while (std::getline(in, item, ',')) {
            try {
                std::size_t used = 0;
                out.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw ConfigError("bad number '" + item + "' in beta schedule '" + text + "'");
            }
        }
        return out;
    };
    if (text.rfind("lin:", 0) == 0) {
        const auto v = numbers(text.substr(4));
        if (v.size() != 4 || v[0] < 0 || v[1] < 0) throw ConfigError("linear schedule is lin:start,end,beta0,beta1");
        return linear(static_cast<std::uint64_t>(v[0]), static_cast<std::uint64_t>(v[1]), v[2], v[3]);
    }
    const std::string body = text.rfind("const:", 0) == 0 ? text.substr(6) : text;
    const auto v = numbers(body);
    if (v.size() != 1) throw ConfigError("constant schedule is const:beta");
    return constant(v[0]);
}

double WeightSchedule::beta(std::uint64_t step) const {
    if (kind_ == Kind::Constant || step <= start_) return beta0_;
    if (step >= end_) return beta1_;
    const double t = static_cast<double>(step - start_) / static_cast<double>(end_ - start_);
    return beta0_ + t * (beta1_ - beta0_);
}

std::string WeightSchedule::describe() const {
    std::ostringstream out;
    out.precision(17);
    if (kind_ == Kind::Constant) {
        out << "const:" << beta0_;
    } else {
        out << "lin:" << start_ << ',' << end_ << ',' << beta0_ << ',' << beta1_;
    }
    return out.str();
}

double anneal_beta(const WeightSchedule& schedule, std::uint64_t step) { return schedule.beta(step); }

double metropolis_probability(long delta, double beta) {
    if (beta == 0.0 || delta <= 0) return 1.0;
    return std::exp2(-beta * static_cast<double>(delta));
}

bool metropolis_accept(long delta, double beta, RandomSource& rng) {
    if (beta < 0.0) throw ConfigError("beta must be nonnegative");
    if (beta == 0.0 || delta <= 0) return true;
    return rng.uniform01() < metropolis_probability(delta, beta);
}

bool metropolis_accept(const Partition& current, const Partition& proposed, double beta, RandomSource& rng) {
    const long delta =
        static_cast<long>(proposed.cut_edges().size()) - static_cast<long>(current.cut_edges().size());
    return metropolis_accept(delta, beta, rng);
}

double exchange_probability(double beta_i, double beta_j, long cut_i, long cut_j) {
    const double exponent = (beta_i - beta_j) * static_cast<double>(cut_i - cut_j);
    return exponent >= 0.0 ? 1.0 : std::exp2(exponent);
}

std::vector<double> tempering_swap(std::span<const long> cut_counts, std::vector<double> betas, RandomSource& rng) {
    if (cut_counts.size() != betas.size()) throw ConfigError("tempering: one beta per replica required");
    if (betas.size() < 2) throw ConfigError("tempering needs at least two replicas");
    std::vector<std::size_t> slot(betas.size());
    std::iota(slot.begin(), slot.end(), 0);
    std::stable_sort(slot.begin(), slot.end(), [&](std::size_t a, std::size_t b) { return betas[a] < betas[b]; });
    for (std::size_t t = 0; t + 1 < slot.size(); ++t) {
        const std::size_t i = slot[t];
        const std::size_t j = slot[t + 1];
        const double p = exchange_probability(betas[i], betas[j], cut_counts[i], cut_counts[j]);
        if (p >= 1.0 || rng.uniform01() < p) {
            std::swap(betas[i], betas[j]);
            std::swap(slot[t], slot[t + 1]);
        }
    }
    return betas;
}

std::vector<double> tempering_swap(std::span<const Partition> replicas, std::vector<double> betas, RandomSource& rng) {
    std::vector<long> cuts;
    cuts.reserve(replicas.size());
    for (const Partition& p : replicas) cuts.push_back(static_cast<long>(p.cut_edges().size()));
    return tempering_swap(cuts, std::move(betas), rng);
}

std::vector<int> tempering_swap_levels(std::span<const long> cut_counts, std::vector<int> levels,
                                       std::span<const double> ladder, RandomSource& rng) {
    const std::size_t r = levels.size();
    if (cut_counts.size() != r || ladder.size() != r) throw ConfigError("tempering: ladder and replicas differ in size");
    if (r < 2) throw ConfigError("tempering needs at least two replicas");
    std::vector<std::size_t> at(r, r);
    for (std::size_t i = 0; i < r; ++i) {
        if (levels[i] < 0 || static_cast<std::size_t>(levels[i]) >= r || at[levels[i]] != r) {
            throw ConfigError("tempering: levels must be a permutation");
        }
        at[levels[i]] = i;
    }
    for (std::size_t rung = 0; rung + 1 < r; ++rung) {
        const std::size_t i = at[rung];
        const std::size_t j = at[rung + 1];
        const double p = exchange_probability(ladder[rung], ladder[rung + 1], cut_counts[i], cut_counts[j]);
        if (p >= 1.0 || rng.uniform01() < p) {
            std::swap(levels[i], levels[j]);
            std::swap(at[rung], at[rung + 1]);
        }
    }
    return levels;
}

}  // namespace dchain
