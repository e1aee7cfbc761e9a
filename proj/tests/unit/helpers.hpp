#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "dchain/graph.hpp"
#include "dchain/partition.hpp"
#include "dchain/random.hpp"

namespace dchain::testing {

inline std::shared_ptr<const DualGraph> shared(DualGraph g) { return std::make_shared<const DualGraph>(std::move(g)); }

inline std::shared_ptr<const DualGraph> graph_from(int n, const std::vector<std::pair<int, int>>& pairs,
                                                   std::vector<std::int64_t> pop = {}) {
    std::vector<Edge> edges;
    for (auto [a, b] : pairs) edges.push_back({a, b, 1.0});
    if (pop.empty()) pop.assign(n, 1);
    return shared(DualGraph(n, std::move(edges), std::move(pop)));
}

inline std::shared_ptr<const DualGraph> path(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return graph_from(n, e);
}

inline std::shared_ptr<const DualGraph> grid(int rows, int cols) { return shared(make_lattice(rows, cols)); }

inline Partition stripes(const std::shared_ptr<const DualGraph>& g, int rows, int cols, int k) {
    return Partition(g, stripes_assignment(rows, cols, k), k);
}

/// Random connected graph: a random spanning path plus extra edges.
inline std::shared_ptr<const DualGraph> random_connected(int n, double extra_p, RandomSource& rng) {
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) {
        e.emplace_back(order[i], order[i + 1]);
        adj[order[i]][order[i + 1]] = adj[order[i + 1]][order[i]] = 1;
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (!adj[a][b] && rng.bernoulli(extra_p)) e.emplace_back(a, b);
        }
    }
    return graph_from(n, e);
}

}  // namespace dchain::testing
