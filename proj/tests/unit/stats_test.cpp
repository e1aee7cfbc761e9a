#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "dchain/error.hpp"
#include "dchain/runner.hpp"
#include "dchain/stats.hpp"
#include "helpers.hpp"

using namespace dchain;
using namespace dchain::testing;

namespace {

// deletion-contraction on a multigraph edge list
long long tree_count_oracle(int n, std::vector<std::pair<int, int>> edges) {
    std::function<long long(int, std::vector<std::pair<int, int>>)> rec = [&](int nodes,
                                                                             std::vector<std::pair<int, int>> e) {
        if (nodes == 1) return 1LL;
        std::erase_if(e, [](const auto& x) { return x.first == x.second; });
        if (e.empty()) return 0LL;
        const auto [a, b] = e.back();
        e.pop_back();
        auto contracted = e;
        for (auto& [x, y] : contracted) {
            if (x == b) x = a;
            if (y == b) y = a;
            if (x == nodes - 1) x = b;
            if (y == nodes - 1) y = b;
        }
        // b takes the label of the last node so labels stay dense
        return rec(nodes, e) + rec(nodes - 1, contracted);
    };
    return rec(n, std::move(edges));
}

std::shared_ptr<const DualGraph> two_party_path(std::vector<double> a, std::vector<double> b) {
    const int n = static_cast<int>(a.size());
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
    return shared(DualGraph(n, edges, std::vector<std::int64_t>(n, 1), {{"A", std::move(a)}, {"B", std::move(b)}}));
}

}  // namespace

TEST(Seats, HundredGridRowsPattern) {
    const GridInstance g = make_grid(100, 10, VotePattern::parse("rows:40"));
    EXPECT_EQ(seats_won(g.partition, ElectionSpec{}), 0);
}

TEST(Seats, HundredGridColsPattern) {
    const GridInstance g = make_grid(100, 10, VotePattern::parse("cols:40"));
    EXPECT_EQ(seats_won(g.partition, ElectionSpec{}), 4);
}

TEST(Seats, SingleDistrictIsZero) {
    const GridInstance g = make_grid(4, 1, VotePattern::parse("rows:1"));
    EXPECT_EQ(seats_won(g.partition, ElectionSpec{}), 0);
}

TEST(Seats, TiesAreFlagged) {
    const auto g = two_party_path({1, 0, 1, 1}, {0, 1, 0, 1});
    const Partition p(g, {1, 1, 2, 2}, 2);
    const SeatCount s = seat_count(p, ElectionSpec{});
    EXPECT_EQ(s.won, 1);
    EXPECT_EQ(s.tied, 1);
    EXPECT_EQ(s.lost, 0);
}

TEST(Seats, ComplementElection) {
    const GridInstance g = make_grid(4, 2, VotePattern::parse("cols:2"));
    EXPECT_EQ(seats_won(g.partition, ElectionSpec::complement_of_population("A")), 1);
}

TEST(Shares, SortedAscending) {
    const auto g = two_party_path({3, 1, 1, 3}, {1, 3, 3, 1});
    const Partition p(g, {1, 2, 2, 1}, 2);
    // labels 1 = {0, 3} not contiguous, shares do not care
    EXPECT_EQ(vote_shares(p, ElectionSpec{}), (std::vector<double>{0.25, 0.75}));
}

TEST(Shares, ZeroDenominatorNamesDistrict) {
    const auto g = two_party_path({0, 0, 1}, {0, 0, 1});
    const Partition p(g, {1, 1, 2}, 2);
    try {
        district_shares(p, "A", "B");
        FAIL();
    } catch (const PartitionError& e) {
        EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
    }
}

TEST(MeanMedian, Examples) {
    const std::vector<double> flat{0.5, 0.5, 0.5};
    EXPECT_DOUBLE_EQ(mean_median(flat), 0.0);
    const std::vector<double> skew{0.4, 0.45, 0.8};
    EXPECT_NEAR(mean_median(skew), 0.45 - 0.55, 1e-15);
    const std::vector<double> even{0.2, 0.4, 0.6, 1.0};
    EXPECT_NEAR(median(even), 0.5, 1e-15);
    EXPECT_THROW(mean_median(std::vector<double>{}), std::invalid_argument);
}

TEST(MeanMedianProperty, AntisymmetricUnderPartySwap) {
    RandomSource rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> s(1 + rng.uniform_index(9));
        for (auto& x : s) x = rng.uniform01();
        std::vector<double> t;
        for (double x : s) t.push_back(1.0 - x);
        EXPECT_NEAR(mean_median(s), -mean_median(t), 1e-12);
    }
}

TEST(UnitsSplit, Examples) {
    std::vector<Edge> edges{{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}};
    const auto g = shared(DualGraph(4, edges, {1, 1, 1, 1}, {{"county", {7, 7, 8, 8}}}));
    EXPECT_EQ(units_split(Partition(g, {1, 1, 2, 2}, 2), "county"), 0);
    EXPECT_EQ(units_split(Partition(g, {1, 2, 2, 2}, 2), "county"), 1);
    EXPECT_EQ(units_split(Partition(g, {1, 2, 1, 2}, 2), "county"), 2);
}

TEST(TreeCount, SmallExamples) {
    EXPECT_NEAR(log_spanning_tree_count(make_lattice(2, 2)), std::log(4.0), 1e-12);
    EXPECT_NEAR(log_spanning_tree_count(make_lattice(3, 3)), std::log(192.0), 1e-10);
    EXPECT_NEAR(log_spanning_tree_count(*path(7)), 0.0, 1e-12);
    EXPECT_EQ(spanning_tree_count_exact(make_lattice(3, 3), std::vector<NodeId>{0, 1, 2, 3, 4, 5, 6, 7, 8}), 192);
}

TEST(TreeCount, DisconnectedSubsetThrows) {
    const DualGraph g = make_lattice(3, 3);
    EXPECT_THROW(log_spanning_tree_count(g, std::vector<NodeId>{0, 8}), GraphError);
    EXPECT_EQ(spanning_tree_count_exact(3, std::vector<Edge>{{0, 1, 1.0}}), 0);
}

TEST(TreeCountProperty, AgreesWithDeletionContraction) {
    RandomSource rng(2);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(7));
        const auto g = random_connected(n, 0.4, rng);
        std::vector<std::pair<int, int>> pairs;
        for (const Edge& e : g->edges()) pairs.emplace_back(e.a, e.b);
        const long long expected = tree_count_oracle(n, pairs);
        EXPECT_EQ(spanning_tree_count_exact(n, g->edges()), expected);
        EXPECT_NEAR(log_spanning_tree_count(*g), std::log(static_cast<double>(expected)), 1e-9);
    }
}

TEST(TreeScore, FiftyGridHalvesMagnitude) {
    const DualGraph lattice = make_lattice(50, 50);
    const auto g = shared(lattice);
    const Partition halves(g, stripes_assignment(50, 50, 2), 2);
    EXPECT_NEAR(log_partition_tree_score(halves) / std::log(10.0), 1209.415, 0.001);
}

TEST(TreeScore, PlumpBeatsSnaky) {
    const auto g = grid(6, 6);
    const Partition plump = stripes(g, 6, 6, 2);
    // snake: rows alternate, district 1 fills rows 0, 2, 4 joined along the left column
    std::vector<District> snake(36, 2);
    for (int r = 0; r < 6; r += 2) {
        for (int c = 0; c < 6; ++c) snake[r * 6 + c] = 1;
    }
    snake[1 * 6 + 0] = 1;
    snake[3 * 6 + 0] = 1;
    snake[4 * 6 + 5] = 2;
    snake[2 * 6 + 5] = 2;
    const Partition snaky(g, snake, 2);
    ASSERT_TRUE(is_contiguous(snaky));
    ASSERT_EQ(snaky.district_population(1), 18);
    EXPECT_GT(log_partition_tree_score(plump), log_partition_tree_score(snaky));
}

TEST(TreeScore, NonContiguousThrows) {
    const auto g = path(3);
    EXPECT_THROW(log_partition_tree_score(Partition(g, {1, 2, 1}, 2)), PartitionError);
}
