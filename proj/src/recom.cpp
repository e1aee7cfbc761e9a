#include "dchain/recom.hpp"

#include <algorithm>
#include <set>

#include "dchain/error.hpp"

namespace dchain {

void RecomConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("recom: epsilon must lie in [0, 1)");
    if (max_tree_redraws < 1) throw ConfigError("recom: max_tree_redraws must be positive");
    if (merge_count < 2) throw ConfigError("recom: merge_count must be at least 2");
}

namespace {

std::pair<District, District> choose_pair(const Partition& partition, PairWeighting weighting, RandomSource& rng) {
    const auto cut = partition.cut_edges();
    if (cut.empty()) throw PartitionError("recombination needs at least one cut edge");
    const DualGraph& graph = partition.graph();
    if (weighting == PairWeighting::CutEdges) {
        const Edge& e = graph.edge(cut[rng.uniform_index(cut.size())]);
        return {partition[e.a], partition[e.b]};
    }
    std::set<std::pair<District, District>> pairs;
    for (EdgeId id : cut) {
        const Edge& e = graph.edge(id);
        const District a = partition[e.a];
        const District b = partition[e.b];
        pairs.emplace(std::min(a, b), std::max(a, b));
    }
    auto it = pairs.begin();
    std::advance(it, static_cast<long>(rng.uniform_index(pairs.size())));
    return *it;
}

std::vector<NodeId> nodes_with_labels(const Partition& partition, std::span<const District> labels) {
    std::vector<char> wanted(partition.k() + 1, 0);
    for (District d : labels) wanted[d] = 1;
    std::vector<NodeId> out;
    for (NodeId v = 0; v < partition.node_count(); ++v) {
        if (wanted[partition[v]]) out.push_back(v);
    }
    return out;
}

struct Candidate {
    int child;
    bool take_subtree;
};

std::optional<std::vector<int>> tree_partition_impl(const DualGraph& graph, std::span<const NodeId> region, int parts,
                                                    double epsilon, RandomSource& rng,
                                                    const TreePartitionOptions& options, int* restarts) {
    if (parts < 1) throw ConfigError("tree partition needs at least one part");
    if (region.empty()) throw PartitionError("cannot partition an empty region");
    if (!is_connected_subset(graph, region)) throw PartitionError("region to partition is not connected");
    if (parts == 1) return std::vector<int>(region.size(), 0);

    std::vector<int> position(graph.node_count(), -1);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < region.size(); ++i) {
        position[region[i]] = static_cast<int>(i);
        total += graph.population(region[i]);
    }
    const double target = static_cast<double>(total) / parts;

    std::vector<Candidate> candidates;
    for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
        if (restarts) *restarts = attempt;
        std::vector<int> label(region.size(), -1);
        std::vector<NodeId> remaining(region.begin(), region.end());
        bool complete = true;
        for (int part = 0; part + 1 < parts; ++part) {
            const int left = parts - part;
            const UstSampler sampler(graph, remaining);
            bool split = false;
            for (int draw = 0; draw < options.max_tree_draws && !split; ++draw) {
                const SpanningTree tree = sampler.sample(rng);
                const auto subtree = tree.subtree_weights();
                const double weight = static_cast<double>(tree.total_weight());
                candidates.clear();
                for (int v : tree.top_down_order()) {
                    if (tree.parent(v) < 0) continue;
                    const double below = static_cast<double>(subtree[v]);
                    const double above = weight - below;
                    if (left == 2) {
                        if (within_tolerance(below, target, epsilon) && within_tolerance(above, target, epsilon)) {
                            candidates.push_back({v, true});
                        }
                        continue;
                    }
                    const double rest = target * (left - 1);
                    if (within_tolerance(below, target, epsilon) && within_tolerance(above, rest, epsilon)) {
                        candidates.push_back({v, true});
                    }
                    if (within_tolerance(above, target, epsilon) && within_tolerance(below, rest, epsilon)) {
                        candidates.push_back({v, false});
                    }
                }
                if (candidates.empty()) continue;

                Candidate pick = candidates[rng.uniform_index(candidates.size())];
                if (left == 2 && rng.bernoulli(0.5)) pick.take_subtree = false;
                const std::vector<char> mask = tree.subtree_mask(pick.child);
                const auto tree_nodes = tree.nodes();
                std::vector<NodeId> rest_nodes;
                for (std::size_t i = 0; i < tree_nodes.size(); ++i) {
                    const bool in_piece = (mask[i] != 0) == pick.take_subtree;
                    if (in_piece) {
                        label[position[tree_nodes[i]]] = part;
                    } else if (left == 2) {
                        label[position[tree_nodes[i]]] = part + 1;
                    } else {
                        rest_nodes.push_back(tree_nodes[i]);
                    }
                }
                remaining = std::move(rest_nodes);
                split = true;
            }
            if (!split) {
                complete = false;
                break;
            }
        }
        if (complete) return label;
    }
    return std::nullopt;
}

}  // namespace

RecomChange recom_advance(Partition& partition, const RecomConfig& config, RandomSource& rng) {
    config.validate();
    if (partition.k() < 2) throw PartitionError("recombination needs at least two districts");
    const auto [a, b] = choose_pair(partition, config.pair_weighting, rng);
    const District chosen[] = {a, b};
    const std::vector<NodeId> region = nodes_with_labels(partition, chosen);
    const double ideal =
        static_cast<double>(partition.district_population(a) + partition.district_population(b)) / 2.0;

    const UstSampler sampler(partition.graph(), region);
    for (int draw = 1; draw <= config.max_tree_redraws; ++draw) {
        const SpanningTree tree = sampler.sample(rng);
        const std::vector<int> cuts = find_balanced_cut_children(tree, ideal, config.epsilon);
        if (cuts.empty()) continue;
        const int child = cuts[rng.uniform_index(cuts.size())];
        const bool subtree_gets_first = rng.bernoulli(0.5);
        const std::vector<char> mask = tree.subtree_mask(child);
        std::vector<District> labels(region.size());
        for (std::size_t i = 0; i < region.size(); ++i) {
            labels[i] = ((mask[i] != 0) == subtree_gets_first) ? a : b;
        }
        partition.reassign(region, labels);
        return {a, b, draw};
    }
    throw InfeasibleMergeError("recom: no balanced cut of districts " + std::to_string(a) + " and " +
                               std::to_string(b) + " in " + std::to_string(config.max_tree_redraws) + " trees");
}

Partition recom_step(const Partition& partition, const RecomConfig& config, RandomSource& rng) {
    Partition next = partition;
    recom_advance(next, config, rng);
    return next;
}

std::optional<std::vector<int>> tree_partition(const DualGraph& graph, std::span<const NodeId> region, int parts,
                                               double epsilon, RandomSource& rng,
                                               const TreePartitionOptions& options) {
    return tree_partition_impl(graph, region, parts, epsilon, rng, options, nullptr);
}

RegionPartitioner spanning_tree_partitioner(double epsilon, TreePartitionOptions options) {
    return [epsilon, options](const DualGraph& graph, std::span<const NodeId> region, int parts,
                              RandomSource& rng) { return tree_partition(graph, region, parts, epsilon, rng, options); };
}

std::vector<District> recom_general_advance(Partition& partition, int merge_count,
                                             const RegionPartitioner& partitioner, RandomSource& rng) {
    const int k = partition.k();
    if (merge_count < 2 || merge_count > k) {
        throw ConfigError("recom_general: merge count must lie in [2, k]");
    }
    const DualGraph& graph = partition.graph();
    std::vector<District> selected;
    if (merge_count == k) {
        for (District d = 1; d <= k; ++d) selected.push_back(d);
    } else {
        const auto cut = partition.cut_edges();
        if (cut.empty()) throw PartitionError("recombination needs at least one cut edge");
        const Edge& first = graph.edge(cut[rng.uniform_index(cut.size())]);
        std::vector<char> chosen(k + 1, 0);
        chosen[partition[first.a]] = chosen[partition[first.b]] = 1;
        selected = {partition[first.a], partition[first.b]};
        std::vector<EdgeId> frontier;
        while (static_cast<int>(selected.size()) < merge_count) {
            frontier.clear();
            for (EdgeId id : cut) {
                const Edge& e = graph.edge(id);
                if (chosen[partition[e.a]] != chosen[partition[e.b]]) frontier.push_back(id);
            }
            if (frontier.empty()) throw PartitionError("recom_general: selected districts have no neighbors left");
            const Edge& e = graph.edge(frontier[rng.uniform_index(frontier.size())]);
            const District added = chosen[partition[e.a]] ? partition[e.b] : partition[e.a];
            chosen[added] = 1;
            selected.push_back(added);
        }
        std::sort(selected.begin(), selected.end());
    }

    const std::vector<NodeId> region = nodes_with_labels(partition, selected);
    if (!is_connected_subset(graph, region)) throw PartitionError("recom_general: merged region is disconnected");
    const auto parts = partitioner(graph, region, merge_count, rng);
    if (!parts) throw InfeasibleMergeError("recom_general: partitioner found no admissible split");
    if (parts->size() != region.size()) throw PartitionError("recom_general: partitioner returned wrong size");
    std::vector<District> labels(region.size());
    for (std::size_t i = 0; i < region.size(); ++i) {
        const int part = (*parts)[i];
        if (part < 0 || part >= merge_count) throw PartitionError("recom_general: part index out of range");
        labels[i] = selected[part];
    }
    partition.reassign(region, labels);
    return selected;
}

Partition recom_general(const Partition& partition, int merge_count, const RegionPartitioner& partitioner,
                        RandomSource& rng) {
    Partition next = partition;
    recom_general_advance(next, merge_count, partitioner, rng);
    return next;
}

Seed recursive_tree_seed(std::shared_ptr<const DualGraph> graph, int k, double epsilon, RandomSource& rng,
                         const TreePartitionOptions& options) {
    if (k < 1) throw ConfigError("seed: k must be at least 1");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("seed: epsilon must lie in [0, 1)");
    std::vector<NodeId> all(graph->node_count());
    for (NodeId v = 0; v < graph->node_count(); ++v) all[v] = v;
    int restarts = 0;
    auto parts = tree_partition_impl(*graph, all, k, epsilon, rng, options, &restarts);
    if (!parts) {
        throw SeedError("recursive tree seed: no valid plan after " + std::to_string(options.max_restarts + 1) +
                        " attempts");
    }
    std::vector<District> labels(parts->size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = (*parts)[i] + 1;
    return {Partition(std::move(graph), std::move(labels), k), restarts};
}

Seed flood_fill_seed(std::shared_ptr<const DualGraph> graph, int k, double epsilon, RandomSource& rng,
                     int max_restarts) {
    if (k < 1) throw ConfigError("seed: k must be at least 1");
    if (k > graph->node_count()) throw ConfigError("seed: more districts than nodes");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("seed: epsilon must lie in [0, 1)");
    const int n = graph->node_count();
    const double target = static_cast<double>(graph->total_population()) / k;
    const double upper = (1.0 + epsilon) * target + 1e-12 * target;

    std::vector<District> labels(n);
    std::vector<std::int64_t> pop(k + 1);
    std::vector<IndexedSet> frontier;
    std::vector<NodeId> order(n);
    for (int attempt = 0; attempt <= max_restarts; ++attempt) {
        std::fill(labels.begin(), labels.end(), kUnassigned);
        std::fill(pop.begin(), pop.end(), 0);
        frontier.assign(k + 1, IndexedSet(n));
        for (NodeId v = 0; v < n; ++v) order[v] = v;
        // partial Fisher-Yates for k distinct seed nodes
        for (int i = 0; i < k; ++i) {
            const auto j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
            std::swap(order[i], order[j]);
        }
        int unassigned = n;
        auto absorb = [&](NodeId v, District d) {
            labels[v] = d;
            pop[d] += graph->population(v);
            --unassigned;
            for (District e = 1; e <= k; ++e) frontier[e].erase(v);
            for (const Adjacency& adj : graph->neighbors(v)) {
                if (labels[adj.node] == kUnassigned) frontier[d].insert(adj.node);
            }
        };
        for (int i = 0; i < k; ++i) absorb(order[i], i + 1);

        bool failed = false;
        while (unassigned > 0 && !failed) {
            District grow = 0;
            for (District d = 1; d <= k; ++d) {
                if (frontier[d].empty()) {
                    if (!within_tolerance(static_cast<double>(pop[d]), target, epsilon) &&
                        static_cast<double>(pop[d]) < target) {
                        failed = true;  // stranded below tolerance
                        break;
                    }
                    continue;
                }
                if (grow == 0 || pop[d] < pop[grow]) grow = d;
            }
            if (failed || grow == 0) {
                failed = true;
                break;
            }
            const NodeId v = frontier[grow][rng.uniform_index(frontier[grow].size())];
            if (static_cast<double>(pop[grow] + graph->population(v)) > upper) {
                failed = true;
                break;
            }
            absorb(v, grow);
        }
        if (!failed) {
            for (District d = 1; d <= k; ++d) {
                if (!within_tolerance(static_cast<double>(pop[d]), target, epsilon)) failed = true;
            }
        }
        if (!failed) return {Partition(std::move(graph), labels, k), attempt};
    }
    throw SeedError("flood fill seed: no valid plan after " + std::to_string(max_restarts + 1) + " attempts");
}

}  // namespace dchain
