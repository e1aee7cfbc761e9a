#include "dchain/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "dchain/error.hpp"
#include "dchain/spanning_tree.hpp"

namespace dchain {

StateSpace::StateSpace(std::shared_ptr<const DualGraph> graph, int k, std::vector<std::vector<District>> states)
    : graph_(std::move(graph)), k_(k), states_(std::move(states)) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
        states_[i] = canonicalize(states_[i]);
        if (!index_.emplace(states_[i], i).second) throw PartitionError("duplicate state in state space");
    }
}

Partition StateSpace::partition(std::size_t i) const { return Partition(graph_, states_[i], k_); }

std::optional<std::size_t> StateSpace::find(std::span<const District> assignment) const {
    const auto it = index_.find(canonicalize(assignment));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

StateSpace enumerate_partitions(std::shared_ptr<const DualGraph> graph, int k, const ConstraintSet& constraints,
                                double guard) {
    const int n = graph->node_count();
    if (k < 1 || k > n) throw ConfigError("enumerate_partitions: need 1 <= k <= node count");
    if (n * std::log(static_cast<double>(k)) > std::log(guard)) {
        throw SizeGuardError("enumerate_partitions: " + std::to_string(k) + "^" + std::to_string(n) +
                             " labelings exceed the guard");
    }
    std::vector<std::vector<District>> states;
    std::vector<District> labels(n, 1);
    std::vector<std::int64_t> pop(k + 1);
    // restricted growth strings: each canonical labeling is visited once
    std::function<void(int, int)> extend = [&](int i, int used) {
        if (n - i < k - used) return;
        if (i == n) {
            std::fill(pop.begin(), pop.end(), 0);
            for (NodeId v = 0; v < n; ++v) pop[labels[v]] += graph->population(v);
            for (District d = 1; d <= k; ++d) {
                if (!constraints.population_ok(*graph, k, pop[d])) return;
            }
            if (constraints.require_contiguity && !is_contiguous(*graph, labels, k)) return;
            if (constraints.check(Partition(graph, labels, k))) states.push_back(labels);
            return;
        }
        for (District d = 1; d <= std::min(k, used + 1); ++d) {
            labels[i] = d;
            extend(i + 1, std::max(used, d));
        }
    };
    labels[0] = 1;
    extend(1, 1);
    return StateSpace(std::move(graph), k, std::move(states));
}

double TransitionMatrix::max_row_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const auto r = row(i);
        worst = std::max(worst, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
    }
    return worst;
}

bool TransitionMatrix::has_negative_entry() const {
    return std::any_of(data_.begin(), data_.end(), [](double x) { return x < 0.0; });
}

namespace {

/// State ids reached by each valid single-node move of state i.
std::vector<std::size_t> valid_moves(const StateSpace& space, const ConstraintSet& constraints, std::size_t i,
                                     std::size_t* pair_count) {
    const Partition p = space.partition(i);
    if (pair_count) *pair_count = p.pair_count();
    std::vector<std::size_t> targets;
    for (std::size_t j = 0; j < p.pair_count(); ++j) {
        const FlipMove move = p.pair(j);
        if (p.district_size(move.from) <= 1) continue;
        const Partition q = apply_flip(p, move.node, move.to);
        if (!constraints.check(q)) continue;
        const auto id = space.find(q);
        if (!id) throw PartitionError("state space is not closed under the constraint set");
        targets.push_back(*id);
    }
    return targets;
}

}  // namespace

std::vector<std::size_t> flip_degrees(const StateSpace& space, const ConstraintSet& constraints) {
    std::vector<std::size_t> degree(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) degree[i] = valid_moves(space, constraints, i, nullptr).size();
    return degree;
}

TransitionMatrix flip_matrix(const StateSpace& space, const ConstraintSet& constraints, const FlipVariant& variant) {
    const std::size_t n = space.size();
    const double scale = variant.max_degree * space.graph().node_count();
    TransitionMatrix x(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t pairs = 0;
        const auto targets = valid_moves(space, constraints, i, &pairs);
        if (variant.kind != FlipVariant::Kind::Plain && !(static_cast<double>(pairs) < scale)) {
            throw ConfigError("flip_matrix: M too small for a state with " + std::to_string(pairs) + " pairs");
        }
        if (targets.empty()) {
            x(i, i) = 1.0;
            continue;
        }
        double each = 0.0;
        switch (variant.kind) {
            case FlipVariant::Kind::Plain:
                each = 1.0 / static_cast<double>(targets.size());
                break;
            case FlipVariant::Kind::UniformFlip:
                each = 1.0 / scale;
                break;
            case FlipVariant::Kind::UniformFlipRetry:
                each = static_cast<double>(pairs) / scale / static_cast<double>(targets.size());
                break;
        }
        double moved = 0.0;
        for (std::size_t t : targets) {
            x(i, t) += each;
            moved += each;
        }
        x(i, i) += 1.0 - moved;
    }
    return x;
}

std::vector<int> chain_components(const TransitionMatrix& matrix) {
    const std::size_t n = matrix.size();
    std::vector<int> component(n, -1);
    int next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (component[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        component[s] = next;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i || component[j] >= 0) continue;
                if (matrix(i, j) > 0.0 || matrix(j, i) > 0.0) {
                    component[j] = next;
                    stack.push_back(j);
                }
            }
        }
        ++next;
    }
    return component;
}

int component_count(const TransitionMatrix& matrix) {
    const auto c = chain_components(matrix);
    return c.empty() ? 0 : *std::max_element(c.begin(), c.end()) + 1;
}

std::vector<double> stationary_distribution(const TransitionMatrix& matrix, double tolerance) {
    const Eigen::Index n = static_cast<Eigen::Index>(matrix.size());
    Eigen::MatrixXd lazy(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) lazy(i, j) = 0.5 * matrix(i, j);
        lazy(i, i) += 0.5;
    }
    Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
    // pi L^(2^s): each squaring doubles the number of steps taken
    for (int s = 0; s < 64; ++s) {
        const Eigen::RowVectorXd next = pi * lazy;
        const double change = (next - pi).cwiseAbs().maxCoeff();
        pi = next;
        if (change < tolerance) break;
        lazy = lazy * lazy;
    }
    pi /= pi.sum();
    return std::vector<double>(pi.data(), pi.data() + n);
}

double stationarity_error(const TransitionMatrix& matrix, std::span<const double> pi) {
    const std::size_t n = matrix.size();
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += pi[i] * matrix(i, j);
        worst = std::max(worst, std::abs(acc - pi[j]));
    }
    return worst;
}

std::vector<std::vector<EdgeId>> enumerate_spanning_trees(const DualGraph& graph, std::uint64_t limit) {
    std::vector<NodeId> all(graph.node_count());
    std::iota(all.begin(), all.end(), 0);
    const BigInt count = spanning_tree_count_exact(graph, all);
    if (count > limit) {
        throw SizeGuardError("enumerate_spanning_trees: " + count.str() + " trees exceed the limit");
    }
    const int n = graph.node_count();
    const int m = graph.edge_count();
    std::vector<std::vector<EdgeId>> trees;
    std::vector<EdgeId> chosen;
    std::vector<int> component(n);
    std::iota(component.begin(), component.end(), 0);

    std::function<void(int)> visit = [&](int e) {
        const int needed = n - 1 - static_cast<int>(chosen.size());
        if (needed == 0) {
            trees.push_back(chosen);
            return;
        }
        if (m - e < needed) return;
        const Edge& edge = graph.edge(e);
        const int ca = component[edge.a];
        const int cb = component[edge.b];
        if (ca != cb) {
            const std::vector<int> saved = component;
            for (int& c : component) {
                if (c == cb) c = ca;
            }
            chosen.push_back(e);
            visit(e + 1);
            chosen.pop_back();
            component = saved;
        }
        visit(e + 1);
    };
    visit(0);
    return trees;
}

TreeCutDistribution tree_cut_distribution(const DualGraph& graph, double epsilon, std::uint64_t limit) {
    const auto trees = enumerate_spanning_trees(graph, limit);
    std::vector<NodeId> all(graph.node_count());
    std::iota(all.begin(), all.end(), 0);
    const double ideal = static_cast<double>(graph.total_population()) / 2.0;

    std::map<std::vector<District>, TreeCutSplit> splits;
    TreeCutDistribution out;
    out.tree_count = trees.size();
    for (const auto& edges : trees) {
        const SpanningTree tree = SpanningTree::from_edges(graph, all, edges);
        const auto children = find_balanced_cut_children(tree, ideal, epsilon);
        if (children.empty()) continue;
        ++out.cuttable_trees;
        const double share = 1.0 / static_cast<double>(children.size());
        for (int child : children) {
            const auto mask = tree.subtree_mask(child);
            std::vector<District> labels(all.size());
            for (std::size_t i = 0; i < labels.size(); ++i) labels[tree.nodes()[i]] = mask[i] ? 1 : 2;
            labels = canonicalize(labels);
            TreeCutSplit& split = splits[labels];
            split.assignment = labels;
            split.probability += share;
            ++split.incidences;
        }
    }
    for (auto& [labels, split] : splits) {
        split.probability /= static_cast<double>(out.cuttable_trees);
        std::vector<NodeId> first;
        std::vector<NodeId> second;
        for (NodeId v = 0; v < graph.node_count(); ++v) (labels[v] == 1 ? first : second).push_back(v);
        std::uint64_t crossing = 0;
        for (const Edge& e : graph.edges()) crossing += labels[e.a] != labels[e.b];
        split.tree_product =
            spanning_tree_count_exact(graph, first) * spanning_tree_count_exact(graph, second) * crossing;
        out.splits.push_back(std::move(split));
    }
    return out;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("total_variation: length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
    return 0.5 * sum;
}

std::vector<double> normalize(std::span<const double> counts) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    std::vector<double> out(counts.begin(), counts.end());
    if (total > 0.0) {
        for (double& x : out) x /= total;
    }
    return out;
}

}  // namespace dchain
