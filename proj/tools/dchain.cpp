#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dchain/flip.hpp"
#include "dchain/oracle.hpp"
#include "dchain/recom.hpp"
#include "dchain/runner.hpp"

namespace {

using namespace dchain;

struct Override {
    const char* flag;
    const char* key;
    const char* help;
};

// CLI flag -> config key
const Override kOverrides[] = {
    {"--graph", "graph", "graph JSON file"},
    {"--grid", "grid", "synthetic grid NxN (or RxC)"},
    {"--pattern", "pattern", "vote pattern rows:M | cols:M | none"},
    {"--districts", "districts", "district count k"},
    {"--seed-method", "seed_method", "stripes | file | recursive-tree | flood-fill"},
    {"--assignment", "assignment", "assignment CSV for seed-method file"},
    {"--seed-epsilon", "seed_epsilon", "population tolerance of the seed plan"},
    {"--chain", "chain", "flip | uniform-flip | uniform-flip-fast | recom | recom-general"},
    {"--merge-count", "merge_count", "districts merged per recom-general step"},
    {"--steps", "steps", "chain steps"},
    {"--pop-tol", "pop_tol", "population tolerance (or none)"},
    {"--cut-cap", "cut_cap", "cut-edge cap: count, fraction < 1, abs:N or frac:F"},
    {"--contiguity", "contiguity", "require contiguous districts (true/false)"},
    {"--recom-epsilon", "recom_epsilon", "ReCom balance tolerance"},
    {"--pair-weighting", "pair_weighting", "cut-edges | district-pairs"},
    {"--max-degree", "max_degree", "uniform flip self-loop scale M"},
    {"--burn", "burn", "burn-in states discarded"},
    {"--interval", "interval", "subsample interval"},
    {"--assignment-every", "assignment_every", "store the assignment on every Nth record"},
    {"--beta-schedule", "beta_schedule", "const:B or lin:a,b,B0,B1"},
    {"--replicas", "replicas", "tempering replicas"},
    {"--swap-interval", "swap_interval", "steps between tempering swaps"},
    {"--stats", "stats", "comma-separated statistics"},
    {"--rng-seed", "rng_seed", "random seed"},
    {"--out", "out", "output path (default stdout)"},
};

void add_overrides(CLI::App* cmd, std::vector<std::pair<std::string, std::optional<std::string>>>& values) {
    values.reserve(std::size(kOverrides));
    for (const Override& o : kOverrides) {
        values.emplace_back(o.key, std::nullopt);
        cmd->add_option(o.flag, values.back().second, o.help);
    }
}

RunConfig build_config(const std::string& path,
                       const std::vector<std::pair<std::string, std::optional<std::string>>>& values) {
    RunConfig config = path.empty() ? RunConfig{} : RunConfig::load(path);
    for (const auto& [key, value] : values) {
        if (value) config.set(key, *value);
    }
    return config;
}

int cmd_run(const RunConfig& config) {
    if (config.out_path.empty()) {
        const RunSummary s = write_ensemble(config, std::cout);
        std::cerr << "records " << s.records << ", accepted " << s.accepted << "\n";
        return 0;
    }
    std::ofstream out(config.out_path);
    if (!out) throw ConfigError("cannot write " + config.out_path);
    const RunSummary s = write_ensemble(config, out);
    std::cerr << "wrote " << s.records << " records to " << config.out_path << "\n";
    return 0;
}

int cmd_seed(RunConfig config, const std::string& method, std::optional<double> epsilon) {
    config.seed_method = parse_seed_method(method);
    if (epsilon) config.seed_epsilon = epsilon;
    if (config.steps <= config.burn_in) config.steps = config.burn_in + 1;
    const PreparedRun prepared = prepare_run(config);
    std::cerr << "seed restarts: " << prepared.seed_restarts
              << ", population deviation: " << population_deviation(prepared.initial) << "\n";
    if (config.out_path.empty()) {
        std::cout << "node_id,district\n";
        for (NodeId v = 0; v < prepared.graph->node_count(); ++v) {
            std::cout << prepared.graph->external_id(v) << ',' << prepared.initial[v] << '\n';
        }
    } else {
        write_assignment_csv(prepared.initial, config.out_path);
    }
    return 0;
}

std::vector<double> flip_occupancy(const StateSpace& space, const ConstraintSet& constraints, ChainKind kind,
                                   double m, std::uint64_t steps, std::uint64_t seed) {
    RandomSource rng(seed);
    Partition p = space.partition(0);
    std::vector<double> counts(space.size(), 0.0);
    std::uint64_t t = 0;
    while (t < steps) {
        FlipStepResult r;
        if (kind == ChainKind::UniformFlipFast) {
            const std::size_t here = *space.find(p);
            r = uniform_flip_fast_advance(p, constraints, m, rng);
            counts[here] += static_cast<double>(std::min(r.wait, steps - t));
            t += r.wait;
            continue;
        }
        if (kind == ChainKind::UniformFlip) {
            uniform_flip_advance(p, constraints, m, rng);
        } else {
            flip_advance(p, constraints, rng);
        }
        counts[*space.find(p)] += 1.0;
        ++t;
    }
    return normalize(counts);
}

int cmd_verify(std::uint64_t steps, std::uint64_t draws, double m, std::uint64_t seed) {
    std::cout << std::setprecision(6) << std::fixed;
    auto grid = std::make_shared<const DualGraph>(make_lattice(4, 4));
    ConstraintSet constraints;
    constraints.pop_tolerance = 0.125;
    const StateSpace space = enumerate_partitions(grid, 2, constraints);
    std::cout << "4x4 grid, k=2, pop tolerance 0.125: " << space.size() << " states\n";

    const TransitionMatrix uniform = flip_matrix(space, constraints, FlipVariant::uniform(m));
    const auto pi_uniform = stationary_distribution(uniform);
    const std::vector<double> flat(space.size(), 1.0 / static_cast<double>(space.size()));
    std::cout << "uniform flip exact stationary vs uniform, TV " << total_variation(pi_uniform, flat) << "\n";

    const TransitionMatrix plain = flip_matrix(space, constraints, FlipVariant::plain());
    const auto pi_plain = stationary_distribution(plain);
    const auto degrees = flip_degrees(space, constraints);
    const auto deg_norm = normalize(std::vector<double>(degrees.begin(), degrees.end()));
    std::cout << "plain flip exact stationary vs degree-proportional, TV " << total_variation(pi_plain, deg_norm)
              << "\n";

    const auto occ_uniform = flip_occupancy(space, constraints, ChainKind::UniformFlip, m, steps, seed);
    std::cout << "uniform flip, " << steps << " steps, empirical vs uniform, TV "
              << total_variation(occ_uniform, flat) << "\n";
    const auto occ_fast = flip_occupancy(space, constraints, ChainKind::UniformFlipFast, m, steps, seed + 1);
    std::cout << "uniform flip fast, " << steps << " effective steps, vs uniform flip, TV "
              << total_variation(occ_fast, occ_uniform) << "\n";
    const auto occ_plain = flip_occupancy(space, constraints, ChainKind::Flip, m, steps, seed + 2);
    std::cout << "plain flip, " << steps << " steps, empirical vs exact, TV " << total_variation(occ_plain, pi_plain)
              << "\n";

    auto small = std::make_shared<const DualGraph>(make_lattice(2, 3));
    const TreeCutDistribution exact = tree_cut_distribution(*small, 0.0);
    std::vector<double> expected;
    std::vector<double> counts(exact.splits.size(), 0.0);
    for (const auto& s : exact.splits) expected.push_back(s.probability);
    RandomSource rng(seed + 3);
    Partition p(small, exact.splits.front().assignment, 2);
    RecomConfig rc;
    rc.epsilon = 0.0;
    for (std::uint64_t i = 0; i < draws; ++i) {
        recom_advance(p, rc, rng);
        const auto canon = p.canonical_assignment();
        for (std::size_t j = 0; j < exact.splits.size(); ++j) {
            if (exact.splits[j].assignment == canon) counts[j] += 1.0;
        }
    }
    std::cout << "recom on 2x3 grid, " << draws << " steps, empirical vs tree-cut oracle, TV "
              << total_variation(normalize(counts), expected) << "\n";
    return 0;
}

int cmd_stats(const std::string& path, const std::string& stat, const std::string& csv_stat,
              const std::string& csv_out, const std::string& winnow_expr, const std::string& filtered_out) {
    Ensemble ensemble = read_ensemble(path);
    std::vector<EnsembleRecord> records = ensemble.records;
    if (!winnow_expr.empty()) {
        records = winnow(records, parse_predicate(winnow_expr));
        std::cerr << records.size() << " of " << ensemble.records.size() << " records kept\n";
    }
    if (!filtered_out.empty()) {
        std::ofstream out(filtered_out);
        if (!ensemble.header.is_null()) out << ensemble.header.dump() << '\n';
        for (const auto& r : records) out << r.to_json().dump() << '\n';
    }
    if (!stat.empty()) {
        std::cout << stat << ",count\n";
        for (const auto& [value, count] : histogram(records, stat)) std::cout << value << ',' << count << '\n';
    }
    if (!csv_stat.empty()) {
        if (csv_out.empty()) {
            write_vector_csv(records, csv_stat, std::cout);
        } else {
            std::ofstream out(csv_out);
            write_vector_csv(records, csv_stat, out);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flip and recombination Markov chains for graph districting ensembles"};
    app.require_subcommand(1);

    std::string run_config;
    std::vector<std::pair<std::string, std::optional<std::string>>> run_values;
    CLI::App* run = app.add_subcommand("run", "run a chain and write a JSON-lines ensemble");
    run->add_option("--config", run_config, "flat key = value config file");
    add_overrides(run, run_values);

    std::string seed_config;
    std::string seed_method = "recursive-tree";
    std::optional<double> seed_epsilon;
    std::vector<std::pair<std::string, std::optional<std::string>>> seed_values;
    CLI::App* seed = app.add_subcommand("seed", "build a seed plan and write it as CSV");
    seed->add_option("--config", seed_config, "flat key = value config file");
    seed->add_option("--method", seed_method, "recursive-tree | flood-fill | stripes");
    seed->add_option("--epsilon", seed_epsilon, "population tolerance");
    add_overrides(seed, seed_values);

    std::uint64_t verify_steps = 1000000;
    std::uint64_t verify_draws = 100000;
    std::uint64_t verify_seed = 1;
    double verify_m = 2.0;
    CLI::App* verify = app.add_subcommand("verify", "compare chains against exact oracles on tiny grids");
    verify->add_option("--steps", verify_steps, "flip steps per empirical run");
    verify->add_option("--draws", verify_draws, "recom steps");
    verify->add_option("--rng-seed", verify_seed, "random seed");
    verify->add_option("--max-degree", verify_m, "uniform flip self-loop scale M");

    std::string ensemble_path;
    std::string stat_name;
    std::string csv_stat;
    std::string csv_out;
    std::string winnow_expr;
    std::string filtered_out;
    CLI::App* stats = app.add_subcommand("stats", "summarize an ensemble");
    stats->add_option("--ensemble", ensemble_path, "ensemble JSON-lines file")->required();
    stats->add_option("--histogram", stat_name, "integer statistic to histogram");
    stats->add_option("--csv", csv_stat, "vector statistic to export as CSV (e.g. shares)");
    stats->add_option("--csv-out", csv_out, "CSV output path (default stdout)");
    stats->add_option("--winnow", winnow_expr, "keep records matching 'name OP value'");
    stats->add_option("--filtered-out", filtered_out, "write the winnowed ensemble here");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(build_config(run_config, run_values));
        if (*seed) return cmd_seed(build_config(seed_config, seed_values), seed_method, seed_epsilon);
        if (*verify) return cmd_verify(verify_steps, verify_draws, verify_m, verify_seed);
        if (*stats) return cmd_stats(ensemble_path, stat_name, csv_stat, csv_out, winnow_expr, filtered_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
