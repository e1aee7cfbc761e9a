#include <CLI11.hpp>

#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "dchain/flip.hpp"
#include "dchain/oracle.hpp"
#include "dchain/recom.hpp"
#include "dchain/runner.hpp"
#include "dchain/spanning_tree.hpp"
#include "dchain/stats.hpp"

using namespace dchain;

namespace {

constexpr std::uint64_t kSeed = 2026;

// criterion 1, 2, 3
constexpr double kStationaryTol = 1e-10;
constexpr double kEmpiricalTv = 0.05;
constexpr std::uint64_t kFlipSteps = 1000000;
constexpr double kFlipScale = 2.0;
constexpr double kSmallPopTol = 0.125;
// criterion 4
constexpr double kRecomTv = 0.02;
constexpr std::uint64_t kRecomDraws = 100000;
// criterion 5
constexpr int kRandomGraphs = 300;
constexpr int kWilsonDraws = 100000;
constexpr double kChiSquareP = 0.01;
// criterion 6
constexpr double kTreeScoreTarget = 1210.0;
constexpr double kTreeScoreRelTol = 0.05;
constexpr double kTreeScoreSeconds = 10.0;
// criterion 7
constexpr std::uint64_t kSeatsRecomSteps = 10000;
constexpr std::uint64_t kSeatsRecomBurn = 500;
constexpr std::uint64_t kSeatsFlipSteps = 1000000;
constexpr double kSeatsPopTol = 0.05;
constexpr double kSeatsOffSupportMass = 0.01;
constexpr double kSeatsBinTol = 0.1;
constexpr double kSeatsFlipShare = 0.95;
constexpr double kSeatsRecomSeconds = 1800.0;
constexpr double kSeatsFlipSeconds = 600.0;
// criterion 8
constexpr std::uint64_t kContrastFlipSteps = 500000;
constexpr std::uint64_t kContrastRecomSteps = 1000;
constexpr double kContrastPopTol = 0.1;
constexpr double kContrastBoundary = 0.5;
constexpr double kContrastCut = 0.25;
constexpr double kContrastCutRatio = 3.0;
constexpr double kContrastRecomShare = 0.99;
// criterion 9
constexpr std::uint64_t kAnnealSteps = 500000;
constexpr double kAnnealPopTol = 0.1;
constexpr double kAnnealOverlap = 0.7;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 4) {
    std::ostringstream out;
    out << std::setprecision(digits) << x;
    return out.str();
}

struct SmallSpace {
    ConstraintSet constraints;
    StateSpace space;
};

const SmallSpace& four_by_four() {
    static const SmallSpace s = [] {
        ConstraintSet c;
        c.pop_tolerance = kSmallPopTol;
        auto g = std::make_shared<const DualGraph>(make_lattice(4, 4));
        return SmallSpace{c, enumerate_partitions(g, 2, c)};
    }();
    return s;
}

std::vector<double> flat(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

std::vector<double> lazy_occupancy(const SmallSpace& s, std::uint64_t steps, std::uint64_t seed) {
    RandomSource rng(seed);
    Partition p = s.space.partition(0);
    std::vector<double> counts(s.space.size(), 0.0);
    for (std::uint64_t t = 0; t < steps; ++t) {
        uniform_flip_advance(p, s.constraints, kFlipScale, rng);
        counts[*s.space.find(p)] += 1.0;
    }
    return normalize(counts);
}

std::vector<double> fast_occupancy(const SmallSpace& s, std::uint64_t steps, std::uint64_t seed) {
    RandomSource rng(seed);
    Partition p = s.space.partition(0);
    std::vector<double> counts(s.space.size(), 0.0);
    std::uint64_t t = 0;
    while (t < steps) {
        const std::size_t here = *s.space.find(p);
        const FlipStepResult r = uniform_flip_fast_advance(p, s.constraints, kFlipScale, rng);
        counts[here] += static_cast<double>(std::min(r.wait, steps - t));
        t += r.wait;
    }
    return normalize(counts);
}

Outcome criterion1() {
    const auto start = Clock::now();
    const SmallSpace& s = four_by_four();
    const auto pi = stationary_distribution(flip_matrix(s.space, s.constraints, FlipVariant::uniform(kFlipScale)));
    double max_dev = 0.0;
    for (double x : pi) max_dev = std::max(max_dev, std::abs(x - 1.0 / static_cast<double>(pi.size())));
    const double tv = total_variation(lazy_occupancy(s, kFlipSteps, kSeed), flat(s.space.size()));
    const double secs = seconds_since(start);
    return {max_dev < kStationaryTol && tv < kEmpiricalTv && secs < 60.0,
            std::to_string(s.space.size()) + " states, exact max deviation " + fmt(max_dev) + ", empirical TV " +
                fmt(tv) + ", " + fmt(secs, 3) + " s"};
}

Outcome criterion2() {
    // the retrying chain only ever takes moves that stay in the space, so the
    // weight is the number of (node, district) pairs whose flip is valid
    const SmallSpace& s = four_by_four();
    const auto pi = stationary_distribution(flip_matrix(s.space, s.constraints, FlipVariant::plain()));
    const auto valid = flip_degrees(s.space, s.constraints);
    const auto target = normalize(std::vector<double>(valid.begin(), valid.end()));
    std::vector<double> raw;
    for (std::size_t i = 0; i < s.space.size(); ++i) raw.push_back(static_cast<double>(s.space.partition(i).pair_count()));
    const auto raw_target = normalize(raw);
    double max_dev = 0.0;
    double raw_dev = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        max_dev = std::max(max_dev, std::abs(pi[i] - target[i]));
        raw_dev = std::max(raw_dev, std::abs(pi[i] - raw_target[i]));
    }
    return {max_dev < kStationaryTol, "max |pi - valid pairs/sum| " + fmt(max_dev) +
                                          " (against all boundary pairs, constraints ignored: " + fmt(raw_dev) + ")"};
}

Outcome criterion3() {
    const SmallSpace& s = four_by_four();
    const double tv =
        total_variation(fast_occupancy(s, kFlipSteps, kSeed + 1), lazy_occupancy(s, kFlipSteps, kSeed + 2));
    return {tv < kEmpiricalTv, "fast vs lazy TV " + fmt(tv)};
}

Outcome criterion4() {
    const auto start = Clock::now();
    auto g = std::make_shared<const DualGraph>(make_lattice(2, 3));
    const TreeCutDistribution exact = tree_cut_distribution(*g, 0.0);
    std::map<std::vector<District>, std::size_t> slot;
    std::vector<double> expected;
    for (const auto& s : exact.splits) {
        slot.emplace(s.assignment, expected.size());
        expected.push_back(s.probability);
    }
    std::vector<double> counts(expected.size(), 0.0);
    RandomSource rng(kSeed);
    Partition p(g, exact.splits.front().assignment, 2);
    RecomConfig rc;
    rc.epsilon = 0.0;
    std::uint64_t unknown = 0;
    for (std::uint64_t i = 0; i < kRecomDraws; ++i) {
        recom_advance(p, rc, rng);
        const auto it = slot.find(p.canonical_assignment());
        if (it == slot.end()) {
            ++unknown;
        } else {
            counts[it->second] += 1.0;
        }
    }
    const double tv = total_variation(normalize(counts), expected);
    const double secs = seconds_since(start);
    return {unknown == 0 && tv < kRecomTv && secs < 60.0,
            std::to_string(expected.size()) + " splits, TV " + fmt(tv) + ", " + fmt(secs, 3) + " s"};
}

BigInt deletion_contraction(int n, std::vector<std::pair<int, int>> e) {
    if (n == 1) return 1;
    std::erase_if(e, [](const auto& x) { return x.first == x.second; });
    if (e.empty()) return 0;
    const auto [a, b] = e.back();
    e.pop_back();
    auto merged = e;
    for (auto& [x, y] : merged) {
        if (x == b) x = a;
        if (y == b) y = a;
        if (x == n - 1) x = b;
        if (y == n - 1) y = b;
    }
    return deletion_contraction(n, e) + deletion_contraction(n - 1, std::move(merged));
}

Outcome criterion5() {
    RandomSource rng(kSeed);
    int mismatches = 0;
    int checked = 0;
    auto check_graph = [&](int n, const std::vector<Edge>& edges) {
        std::vector<std::pair<int, int>> pairs;
        for (const Edge& e : edges) pairs.emplace_back(e.a, e.b);
        if (spanning_tree_count_exact(n, edges) != deletion_contraction(n, pairs)) ++mismatches;
        ++checked;
    };
    for (int n = 1; n <= 7; ++n) {
        std::vector<Edge> complete;
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) complete.push_back({a, b, 1.0});
        }
        check_graph(n, complete);
        // Cayley's formula as a second reference
        if (spanning_tree_count_exact(n, complete) != BigInt(n == 1 ? 1 : static_cast<long>(std::pow(n, n - 2)))) {
            ++mismatches;
        }
    }
    for (int i = 0; i < kRandomGraphs; ++i) {
        const int n = 2 + static_cast<int>(rng.uniform_index(7));
        const double density = 0.1 + 0.8 * rng.uniform01();
        std::vector<Edge> edges;
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                if (rng.bernoulli(density)) edges.push_back({a, b, 1.0});
            }
        }
        check_graph(n, edges);
    }
    const DualGraph grid = make_lattice(3, 3);
    const bool grid_ok = spanning_tree_count_exact(9, grid.edges()) == 192;

    std::map<std::vector<EdgeId>, double> counts;
    for (auto t : enumerate_spanning_trees(grid)) {
        std::sort(t.begin(), t.end());
        counts[t] = 0.0;
    }
    std::vector<NodeId> all(9);
    for (int v = 0; v < 9; ++v) all[v] = v;
    const UstSampler sampler(grid, all);
    RandomSource wilson(kSeed + 1);
    int foreign = 0;
    for (int i = 0; i < kWilsonDraws; ++i) {
        auto edges = sampler.sample(wilson).edges();
        std::sort(edges.begin(), edges.end());
        const auto it = counts.find(edges);
        if (it == counts.end()) {
            ++foreign;
        } else {
            it->second += 1.0;
        }
    }
    const double expected = static_cast<double>(kWilsonDraws) / static_cast<double>(counts.size());
    double stat = 0.0;
    for (const auto& [t, c] : counts) stat += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    const double p = boost::math::cdf(boost::math::complement(dist, stat));
    return {mismatches == 0 && grid_ok && foreign == 0 && counts.size() == 192 && p > kChiSquareP,
            std::to_string(checked) + " graphs, " + std::to_string(mismatches) + " mismatches, 3x3 count " +
                (grid_ok ? "192" : "wrong") + ", Wilson chi-square p " + fmt(p)};
}

Outcome criterion6() {
    const auto start = Clock::now();
    auto g = std::make_shared<const DualGraph>(make_lattice(50, 50));
    const Partition halves(g, stripes_assignment(50, 50, 2), 2);
    const double log10_score = log_partition_tree_score(halves) / std::log(10.0);
    const double secs = seconds_since(start);
    const double rel = std::abs(log10_score - kTreeScoreTarget) / kTreeScoreTarget;
    return {rel <= kTreeScoreRelTol && secs < kTreeScoreSeconds,
            "log10 score " + fmt(log10_score, 7) + ", relative error " + fmt(rel) + ", " + fmt(secs, 3) + " s"};
}

RunConfig grid_run(int n, int k, const std::string& pattern, ChainKind chain) {
    RunConfig c;
    c.grid_rows = c.grid_cols = n;
    c.districts = k;
    c.pattern = VotePattern::parse(pattern);
    c.chain = chain;
    c.rng_seed = kSeed;
    c.assignment_every = 0;
    return c;
}

std::map<long, double> seat_shares(const RunConfig& c) {
    std::map<long, double> h;
    std::uint64_t n = 0;
    run_chain(c, [&](const EnsembleRecord& r) {
        h[r.stats["seats"].get<long>()] += 1.0;
        ++n;
    });
    for (auto& [k, v] : h) v /= static_cast<double>(n);
    return h;
}

std::string describe(const std::map<long, double>& h) {
    std::string out;
    for (const auto& [k, v] : h) out += (out.empty() ? "" : " ") + std::to_string(k) + ":" + fmt(v, 3);
    return out;
}

Outcome criterion7() {
    std::string detail;
    bool pass = true;
    std::map<std::string, std::map<long, double>> recom;
    auto start = Clock::now();
    for (const std::string pattern : {"rows:40", "cols:40"}) {
        RunConfig c = grid_run(100, 10, pattern, ChainKind::Recom);
        c.steps = kSeatsRecomSteps;
        c.burn_in = kSeatsRecomBurn;
        c.pop_tolerance = kSeatsPopTol;
        c.stats = {"seats"};
        const auto h = seat_shares(c);
        double off = 0.0;
        long mode = -1;
        for (const auto& [k, v] : h) {
            if (k < 3 || k > 5) off += v;
            if (mode < 0 || v > h.at(mode)) mode = k;
        }
        pass = pass && off <= kSeatsOffSupportMass && mode == 4;
        recom[pattern] = h;
        detail += "recom " + pattern + " [" + describe(h) + "]; ";
    }
    double max_diff = 0.0;
    for (long k = 0; k <= 10; ++k) {
        const double a = recom["rows:40"].contains(k) ? recom["rows:40"][k] : 0.0;
        const double b = recom["cols:40"].contains(k) ? recom["cols:40"][k] : 0.0;
        max_diff = std::max(max_diff, std::abs(a - b));
    }
    const double recom_secs = seconds_since(start);
    pass = pass && max_diff <= kSeatsBinTol && recom_secs < kSeatsRecomSeconds;
    detail += "max bin diff " + fmt(max_diff, 3) + ", " + fmt(recom_secs, 3) + " s; ";

    start = Clock::now();
    for (const auto& [pattern, seed_seats] : {std::pair{std::string("rows:40"), 0L}, std::pair{std::string("cols:40"), 4L}}) {
        RunConfig c = grid_run(100, 10, pattern, ChainKind::Flip);
        c.steps = kSeatsFlipSteps;
        c.pop_tolerance = kSeatsPopTol;
        c.stats = {"seats"};
        const auto h = seat_shares(c);
        const double share = h.contains(seed_seats) ? h.at(seed_seats) : 0.0;
        pass = pass && share >= kSeatsFlipShare;
        detail += "flip " + pattern + " at " + std::to_string(seed_seats) + " seats " + fmt(share, 4) + "; ";
    }
    const double flip_secs = seconds_since(start);
    pass = pass && flip_secs < kSeatsFlipSeconds;
    detail += fmt(flip_secs, 3) + " s";
    return {pass, detail};
}

Outcome criterion8() {
    RunConfig flip = grid_run(50, 2, "none", ChainKind::Flip);
    flip.steps = kContrastFlipSteps;
    flip.burn_in = kContrastFlipSteps - 1;
    flip.pop_tolerance = kContrastPopTol;
    flip.stats = {"boundary_fraction", "cut_edge_fraction"};
    double boundary = 0.0;
    double cut = 0.0;
    run_chain(flip, [&](const EnsembleRecord& r) {
        boundary = r.stats["boundary_fraction"].get<double>();
        cut = r.stats["cut_edge_fraction"].get<double>();
    });

    RunConfig recom = grid_run(50, 2, "none", ChainKind::Recom);
    recom.steps = kContrastRecomSteps;
    recom.pop_tolerance = kContrastPopTol;
    recom.stats = {"cut_edges"};
    const PreparedRun prep = prepare_run(recom);
    const double seed_cut = static_cast<double>(cut_edge_count(prep.initial));
    std::uint64_t below = 0;
    std::uint64_t total = 0;
    run_chain(recom, [&](const EnsembleRecord& r) {
        below += static_cast<double>(r.stats["cut_edges"].get<long>()) < kContrastCutRatio * seed_cut;
        ++total;
    });
    const double share = static_cast<double>(below) / static_cast<double>(total);
    return {boundary > kContrastBoundary && cut > kContrastCut && share >= kContrastRecomShare,
            "flip boundary fraction " + fmt(boundary) + ", cut fraction " + fmt(cut) + "; recom below " +
                fmt(kContrastCutRatio, 2) + "x seed cut (" + fmt(seed_cut, 4) + ") " + fmt(share)};
}

Outcome criterion9() {
    RunConfig c = grid_run(50, 4, "none", ChainKind::Flip);
    c.seed_method = SeedMethod::RecursiveTree;
    c.seed_epsilon = kAnnealPopTol;
    c.pop_tolerance = kAnnealPopTol;
    c.steps = kAnnealSteps;
    c.burn_in = kAnnealSteps - 1;
    c.schedule = WeightSchedule::linear(100000, 500000, 0.0, 3.0);
    c.stats = {"cut_edges"};
    c.assignment_every = 1;
    const PreparedRun prep = prepare_run(c);
    std::vector<District> final_state;
    long final_cut = 0;
    run_chain(c, prep.initial, [&](const EnsembleRecord& r) {
        final_state = *r.assignment;
        final_cut = r.stats["cut_edges"].get<long>();
    });
    const std::vector<District> seed(prep.initial.assignment().begin(), prep.initial.assignment().end());
    const double overlap = assignment_overlap(seed, final_state);
    return {overlap >= kAnnealOverlap, "overlap with seed " + fmt(overlap) + ", seed cut " +
                                           std::to_string(cut_edge_count(prep.initial)) + ", final cut " +
                                           std::to_string(final_cut)};
}

Outcome criterion10() {
    std::vector<std::pair<std::string, RunConfig>> runs;
    {
        RunConfig c = grid_run(12, 3, "rows:5", ChainKind::Flip);
        c.steps = 5000;
        c.pop_tolerance = 0.2;
        c.assignment_every = 10;
        runs.emplace_back("flip", c);
        c.chain = ChainKind::UniformFlip;
        c.max_degree = 2.0;
        runs.emplace_back("uniform-flip", c);
        c.chain = ChainKind::UniformFlipFast;
        runs.emplace_back("uniform-flip-fast", c);
        c.chain = ChainKind::Recom;
        c.steps = 500;
        runs.emplace_back("recom", c);
        c.chain = ChainKind::RecomGeneral;
        c.merge_count = 3;
        c.seed_method = SeedMethod::FloodFill;
        runs.emplace_back("recom-general", c);
        RunConfig t = grid_run(12, 3, "rows:5", ChainKind::Flip);
        t.steps = 3000;
        t.pop_tolerance = 0.2;
        t.replicas = 3;
        t.swap_interval = 50;
        t.schedule = WeightSchedule::constant(1.0);
        runs.emplace_back("tempered flip", t);
    }
    std::string differing;
    for (const auto& [name, c] : runs) {
        std::ostringstream a;
        std::ostringstream b;
        write_ensemble(c, a);
        write_ensemble(c, b);
        if (a.str() != b.str() || a.str().empty()) differing += (differing.empty() ? "" : ", ") + name;
    }
    return {differing.empty(),
            differing.empty() ? std::to_string(runs.size()) + " configurations byte-identical" : "differ: " + differing};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int only = 0;
    app.add_option("--only", only, "run a single criterion (1-10)")->check(CLI::Range(0, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10};
    int failures = 0;
    for (int i = 1; i <= 10; ++i) {
        if (only != 0 && only != i) continue;
        Outcome o;
        try {
            o = criteria[i - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << "criterion " << i << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
