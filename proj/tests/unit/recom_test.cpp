#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <map>
#include <numeric>

#include "dchain/error.hpp"
#include "dchain/oracle.hpp"
#include "dchain/recom.hpp"
#include "dchain/spanning_tree.hpp"
#include "helpers.hpp"

using namespace dchain;
using namespace dchain::testing;

namespace {

std::vector<NodeId> all_nodes(const DualGraph& g) {
    std::vector<NodeId> v(g.node_count());
    std::iota(v.begin(), v.end(), 0);
    return v;
}

std::vector<EdgeId> sorted_edges(const SpanningTree& t) {
    auto e = t.edges();
    std::sort(e.begin(), e.end());
    return e;
}

double chi_square_p(const std::vector<double>& observed, double expected_each) {
    double stat = 0.0;
    for (double o : observed) stat += (o - expected_each) * (o - expected_each) / expected_each;
    boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

// frequencies of each distinct tree over `draws` Wilson samples
std::map<std::vector<EdgeId>, double> tree_counts(const DualGraph& g, int draws, std::uint64_t seed) {
    RandomSource rng(seed);
    const UstSampler sampler(g, all_nodes(g));
    std::map<std::vector<EdgeId>, double> counts;
    for (int i = 0; i < draws; ++i) counts[sorted_edges(sampler.sample(rng))] += 1.0;
    return counts;
}

std::vector<double> values(const std::map<std::vector<EdgeId>, double>& m) {
    std::vector<double> v;
    for (const auto& [k, c] : m) v.push_back(c);
    return v;
}

}  // namespace

TEST(Wilson, TriangleUniform) {
    const auto g = graph_from(3, {{0, 1}, {1, 2}, {0, 2}});
    const auto counts = tree_counts(*g, 10000, 1);
    ASSERT_EQ(counts.size(), 3u);
    EXPECT_GT(chi_square_p(values(counts), 10000.0 / 3.0), 0.001);
}

TEST(Wilson, FourCycleUniform) {
    const auto counts = tree_counts(*grid(2, 2), 10000, 2);
    ASSERT_EQ(counts.size(), 4u);
    EXPECT_GT(chi_square_p(values(counts), 2500.0), 0.001);
}

TEST(Wilson, ThreeByThreeUniformOverOracleTrees) {
    const auto g = grid(3, 3);
    const auto trees = enumerate_spanning_trees(*g);
    ASSERT_EQ(trees.size(), 192u);
    std::map<std::vector<EdgeId>, double> counts;
    for (auto t : trees) {
        std::sort(t.begin(), t.end());
        counts[t] = 0.0;
    }
    const int draws = 40000;
    for (const auto& [t, c] : tree_counts(*g, draws, 3)) {
        ASSERT_TRUE(counts.contains(t));
        counts[t] = c;
    }
    EXPECT_GT(chi_square_p(values(counts), draws / 192.0), 0.001);
}

TEST(Wilson, TreesUseOnlyInducedEdges) {
    RandomSource rng(4);
    const auto g = grid(6, 6);
    const std::vector<NodeId> region{0, 1, 2, 6, 7, 8, 12, 13, 19};
    for (int i = 0; i < 200; ++i) {
        const SpanningTree t = wilson_ust(*g, region, rng);
        ASSERT_TRUE(t.is_valid(*g));
        for (EdgeId e : t.edges()) {
            const Edge& edge = g->edge(e);
            ASSERT_NE(std::find(region.begin(), region.end(), edge.a), region.end());
            ASSERT_NE(std::find(region.begin(), region.end(), edge.b), region.end());
        }
    }
}

TEST(Wilson, DisconnectedSubsetIsError) {
    RandomSource rng(5);
    const auto g = grid(3, 3);
    EXPECT_THROW(wilson_ust(*g, std::vector<NodeId>{0, 8}, rng), GraphError);
}

TEST(SpanningTree, FromEdgesRejectsCycle) {
    const auto g = graph_from(3, {{0, 1}, {1, 2}, {0, 2}});
    EXPECT_THROW(SpanningTree::from_edges(*g, {0, 1, 2}, std::vector<EdgeId>{0, 1, 2}), GraphError);
    const SpanningTree t = SpanningTree::from_edges(*g, {0, 1, 2}, std::vector<EdgeId>{0, 2});
    EXPECT_TRUE(t.is_valid(*g));
    EXPECT_EQ(t.total_weight(), 3);
}

TEST(BalancedCuts, PathMiddleEdge) {
    const auto g = path(4);
    const SpanningTree t = SpanningTree::from_edges(*g, all_nodes(*g), std::vector<EdgeId>{0, 1, 2});
    const auto cuts = find_balanced_cuts(t, 2.0, 0.0);
    ASSERT_EQ(cuts.size(), 1u);
    EXPECT_EQ(g->edge(cuts[0]).a, 1);
    EXPECT_EQ(g->edge(cuts[0]).b, 2);
}

TEST(BalancedCuts, StarHasNone) {
    const auto g = graph_from(4, {{0, 1}, {0, 2}, {0, 3}});
    const SpanningTree t = SpanningTree::from_edges(*g, all_nodes(*g), std::vector<EdgeId>{0, 1, 2});
    EXPECT_TRUE(find_balanced_cuts(t, 2.0, 0.4).empty());
}

TEST(BalancedCuts, SixPathLooseTolerance) {
    const auto g = path(6);
    const SpanningTree t = SpanningTree::from_edges(*g, all_nodes(*g), std::vector<EdgeId>{0, 1, 2, 3, 4});
    auto cuts = find_balanced_cuts(t, 3.0, 0.34);
    std::vector<std::pair<int, int>> ends;
    for (EdgeId e : cuts) ends.emplace_back(g->edge(e).a, g->edge(e).b);
    std::sort(ends.begin(), ends.end());
    EXPECT_EQ(ends, (std::vector<std::pair<int, int>>{{1, 2}, {2, 3}, {3, 4}}));
}

TEST(BalancedCuts, PopulationWeightsNotNodeCounts) {
    const auto g = graph_from(3, {{0, 1}, {1, 2}}, {4, 1, 3});
    const SpanningTree t = SpanningTree::from_edges(*g, all_nodes(*g), std::vector<EdgeId>{0, 1});
    const auto cuts = find_balanced_cuts(t, 4.0, 0.0);
    ASSERT_EQ(cuts.size(), 1u);
    EXPECT_EQ(g->edge(cuts[0]).a, 0);
}

TEST(RecomStep, TwoByThreeMatchesTreeCutOracle) {
    const auto g = grid(2, 3);
    const TreeCutDistribution exact = tree_cut_distribution(*g, 0.0);
    ASSERT_EQ(exact.splits.size(), 3u);
    RecomConfig config;
    config.epsilon = 0.0;
    RandomSource rng(6);
    const int per_start = 10000;
    for (const auto& start : exact.splits) {
        const Partition p(g, start.assignment, 2);
        std::vector<double> counts(3, 0.0);
        for (int i = 0; i < per_start; ++i) {
            const auto canon = recom_step(p, config, rng).canonical_assignment();
            for (std::size_t j = 0; j < 3; ++j) counts[j] += exact.splits[j].assignment == canon;
        }
        std::vector<double> expected;
        for (const auto& s : exact.splits) expected.push_back(s.probability);
        EXPECT_LT(total_variation(normalize(counts), expected), 0.02);
    }
}

TEST(RecomStepProperty, TouchesTwoDistrictsAndStaysValid) {
    const auto g = grid(12, 12);
    Partition p = stripes(g, 12, 12, 4);
    RecomConfig config;
    config.epsilon = 0.1;
    RandomSource rng(7);
    for (int i = 0; i < 300; ++i) {
        const Partition before = p;
        const RecomChange change = recom_advance(p, config, rng);
        ASSERT_TRUE(is_contiguous(p));
        ASSERT_TRUE(p.matches_recomputation());
        const double ideal =
            static_cast<double>(before.district_population(change.first) + before.district_population(change.second)) /
            2.0;
        for (District d : {change.first, change.second}) {
            ASSERT_LE(std::abs(static_cast<double>(p.district_population(d)) - ideal), 0.1 * ideal + 1e-9);
        }
        for (NodeId v = 0; v < g->node_count(); ++v) {
            if (before[v] != change.first && before[v] != change.second) {
                ASSERT_EQ(p[v], before[v]);
            }
            if (p[v] != before[v]) {
                ASSERT_TRUE(p[v] == change.first || p[v] == change.second);
            }
        }
    }
}

TEST(RecomStep, DistrictPairWeightingRuns) {
    const auto g = grid(9, 9);
    Partition p = stripes(g, 9, 9, 3);
    RecomConfig config;
    config.epsilon = 0.1;
    config.pair_weighting = PairWeighting::DistrictPairs;
    RandomSource rng(8);
    std::map<std::pair<District, District>, int> pairs;
    for (int i = 0; i < 300; ++i) {
        const RecomChange c = recom_advance(p, config, rng);
        ++pairs[{std::min(c.first, c.second), std::max(c.first, c.second)}];
        ASSERT_TRUE(is_contiguous(p));
    }
    EXPECT_GE(pairs.size(), 2u);
}

TEST(RecomStep, InfeasibleMergeAfterRedraws) {
    // star with 3 unit leaves: no 2|2 cut exists
    const auto g = graph_from(4, {{0, 1}, {0, 2}, {0, 3}});
    const Partition p(g, {1, 1, 2, 2}, 2);
    RecomConfig config;
    config.epsilon = 0.0;
    config.max_tree_redraws = 20;
    RandomSource rng(9);
    EXPECT_THROW(recom_step(p, config, rng), InfeasibleMergeError);
}

TEST(RecomStep, ConfigValidation) {
    RecomConfig config;
    config.epsilon = 1.0;
    EXPECT_THROW(config.validate(), ConfigError);
    config.epsilon = 0.0;
    EXPECT_NO_THROW(config.validate());
    config.max_tree_redraws = 0;
    EXPECT_THROW(config.validate(), ConfigError);
}

TEST(RecomStep, LargeGridScrambles) {
    const auto g = grid(100, 100);
    const Partition seed = stripes(g, 100, 100, 10);
    Partition p = seed;
    RecomConfig config;
    config.epsilon = 0.02;
    RandomSource rng(10);
    for (int i = 0; i < 100; ++i) recom_advance(p, config, rng);
    const auto cut = cut_edge_count(p);
    EXPECT_GE(cut, 600u);
    EXPECT_LE(cut, 1400u);
    EXPECT_LT(assignment_overlap(p.assignment(), seed.assignment()), 0.95);
}

TEST(RecomGeneral, TwoDistrictFormMatchesRecomStep) {
    const auto g = grid(2, 3);
    const TreeCutDistribution exact = tree_cut_distribution(*g, 0.0);
    const Partition p(g, exact.splits.front().assignment, 2);
    const RegionPartitioner partitioner = spanning_tree_partitioner(0.0);
    RandomSource rng(11);
    std::vector<double> counts(exact.splits.size(), 0.0);
    const int n = 30000;
    for (int i = 0; i < n; ++i) {
        const auto canon = recom_general(p, 2, partitioner, rng).canonical_assignment();
        for (std::size_t j = 0; j < counts.size(); ++j) counts[j] += exact.splits[j].assignment == canon;
    }
    std::vector<double> expected;
    for (const auto& s : exact.splits) expected.push_back(s.probability);
    EXPECT_LT(total_variation(normalize(counts), expected), 0.02);
}

TEST(RecomGeneral, WholePlanIndependentOfInput) {
    const auto g = grid(4, 4);
    ConstraintSet c;
    c.pop_tolerance = 0.0;
    const StateSpace space = enumerate_partitions(g, 2, c);
    const RegionPartitioner partitioner = spanning_tree_partitioner(0.0);
    const Partition vertical = stripes(g, 4, 4, 2);
    const Partition horizontal(g, {1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2}, 2);
    const int n = 20000;
    std::vector<double> a(space.size(), 0.0);
    std::vector<double> b(space.size(), 0.0);
    RandomSource rng_a(12);
    RandomSource rng_b(13);
    for (int i = 0; i < n; ++i) {
        a[*space.find(recom_general(vertical, 2, partitioner, rng_a))] += 1.0;
        b[*space.find(recom_general(horizontal, 2, partitioner, rng_b))] += 1.0;
    }
    // two-sample chi-square over states seen in either run
    double stat = 0.0;
    int cells = 0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (a[i] + b[i] == 0.0) continue;
        stat += (a[i] - b[i]) * (a[i] - b[i]) / (a[i] + b[i]);
        ++cells;
    }
    boost::math::chi_squared dist(cells - 1);
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, stat)), 0.001);
}

TEST(RecomGeneral, IdentityPartitionerKeepsPlan) {
    const auto g = grid(6, 6);
    const Partition p = stripes(g, 6, 6, 3);
    // return the current split of the region, in selected-label order
    const RegionPartitioner identity = [&p](const DualGraph&, std::span<const NodeId> region, int,
                                            RandomSource&) -> std::optional<std::vector<int>> {
        std::vector<District> labels;
        for (NodeId v : region) labels.push_back(p[v]);
        std::vector<District> distinct(labels);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        std::vector<int> parts;
        for (District d : labels) {
            parts.push_back(static_cast<int>(std::find(distinct.begin(), distinct.end(), d) - distinct.begin()));
        }
        return parts;
    };
    RandomSource rng(14);
    for (int l : {2, 3}) {
        const Partition q = recom_general(p, l, identity, rng);
        EXPECT_TRUE(std::equal(q.assignment().begin(), q.assignment().end(), p.assignment().begin()));
    }
}

TEST(RecomGeneral, DisconnectedRegionIsError) {
    const auto g = path(5);
    const Partition p(g, {1, 2, 1, 3, 3}, 3);
    const RegionPartitioner partitioner = spanning_tree_partitioner(0.5);
    RandomSource rng(15);
    int errors = 0;
    for (int i = 0; i < 50; ++i) {
        try {
            recom_general(p, 2, partitioner, rng);
        } catch (const PartitionError&) {
            ++errors;
        }
    }
    EXPECT_GT(errors, 0);
}

TEST(RecomGeneral, GivingUpIsInfeasibleMerge) {
    const auto g = grid(4, 4);
    const Partition p = stripes(g, 4, 4, 2);
    const RegionPartitioner never = [](const DualGraph&, std::span<const NodeId>, int,
                                       RandomSource&) -> std::optional<std::vector<int>> { return std::nullopt; };
    RandomSource rng(16);
    EXPECT_THROW(recom_general(p, 2, never, rng), InfeasibleMergeError);
    EXPECT_THROW(recom_general(p, 3, never, rng), ConfigError);
}

TEST(TreePartition, ThreeWaySplitWithinTolerance) {
    const auto g = grid(6, 6);
    RandomSource rng(17);
    const auto nodes = all_nodes(*g);
    for (int i = 0; i < 20; ++i) {
        const auto parts = tree_partition(*g, nodes, 3, 0.1, rng);
        ASSERT_TRUE(parts.has_value());
        std::vector<District> labels;
        for (int x : *parts) labels.push_back(x + 1);
        const Partition p(g, labels, 3);
        ASSERT_TRUE(is_contiguous(p));
        ASSERT_LE(population_deviation(p), 0.1 + 1e-12);
    }
}

TEST(RecursiveTreeSeed, PathOfFour) {
    const auto g = path(4);
    RandomSource rng(18);
    for (int i = 0; i < 20; ++i) {
        const Seed s = recursive_tree_seed(g, 2, 0.0, rng);
        EXPECT_EQ(s.partition.canonical_assignment(), (std::vector<District>{1, 1, 2, 2}));
    }
}

TEST(RecursiveTreeSeed, SixBySixIntoFourExact) {
    const auto g = grid(6, 6);
    RandomSource rng(19);
    const Seed s = recursive_tree_seed(g, 4, 0.0, rng, {1000, 200});
    EXPECT_TRUE(is_contiguous(s.partition));
    for (District d = 1; d <= 4; ++d) EXPECT_EQ(s.partition.district_size(d), 9);
}

TEST(RecursiveTreeSeed, HundredGridTenDistrictsQuickly) {
    const auto g = grid(100, 100);
    RandomSource rng(20);
    const auto t0 = std::chrono::steady_clock::now();
    const Seed s = recursive_tree_seed(g, 10, 0.05, rng);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_TRUE(is_contiguous(s.partition));
    EXPECT_LE(population_deviation(s.partition), 0.05 + 1e-12);
    EXPECT_LT(seconds, 60.0);
    RecordProperty("seconds", std::to_string(seconds));
}

TEST(RecursiveTreeSeed, ImpossibleIsSeedError) {
    const auto g = graph_from(4, {{0, 1}, {0, 2}, {0, 3}});
    RandomSource rng(21);
    EXPECT_THROW(recursive_tree_seed(g, 2, 0.0, rng, {5, 3}), SeedError);
}

TEST(FloodFillSeed, SingleDistrict) {
    const auto g = grid(3, 3);
    RandomSource rng(22);
    const Seed s = flood_fill_seed(g, 1, 0.0, rng);
    EXPECT_EQ(s.partition.district_size(1), 9);
}

TEST(FloodFillSeed, PathOfFour) {
    const auto g = path(4);
    RandomSource rng(23);
    for (int i = 0; i < 20; ++i) {
        const Seed s = flood_fill_seed(g, 2, 0.0, rng);
        EXPECT_EQ(s.partition.canonical_assignment(), (std::vector<District>{1, 1, 2, 2}));
    }
}

TEST(FloodFillSeed, TwentyGridFourDistricts) {
    const auto g = grid(20, 20);
    RandomSource rng(24);
    const Seed s = flood_fill_seed(g, 4, 0.05, rng);
    EXPECT_TRUE(is_contiguous(s.partition));
    EXPECT_LE(population_deviation(s.partition), 0.05 + 1e-12);
    RecordProperty("restarts", std::to_string(s.restarts));
}

TEST(FloodFillSeed, ImpossibleIsSeedError) {
    const auto g = graph_from(4, {{0, 1}, {0, 2}, {0, 3}});
    RandomSource rng(25);
    EXPECT_THROW(flood_fill_seed(g, 3, 0.0, rng, 50), SeedError);
}
