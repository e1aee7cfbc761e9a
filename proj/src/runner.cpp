#include "dchain/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>
#include <thread>

#include "dchain/flip.hpp"

namespace dchain {

namespace {

constexpr std::uint64_t kSeedStream = 0x5eed;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used == value.size()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long x = std::stoull(value, &used);
        if (used == value.size() && value.find('-') == std::string::npos) return x;
    } catch (const std::exception&) {
    }
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used == value.size() && x >= 0 && x < 1.8e19 && x == std::floor(x)) return static_cast<std::uint64_t>(x);
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + value + "'");
}

int parse_int(const std::string& key, const std::string& value) {
    const std::uint64_t x = parse_count(key, value);
    if (x > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) throw ConfigError("'" + key + "' too large");
    return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

CutEdgeCap parse_cut_cap(const std::string& value) {
    if (value.rfind("abs:", 0) == 0) return CutEdgeCap::absolute(parse_count("cut_cap", value.substr(4)));
    if (value.rfind("frac:", 0) == 0) return CutEdgeCap::fraction(parse_double("cut_cap", value.substr(5)));
    const double x = parse_double("cut_cap", value);
    if (x < 0) throw ConfigError("cut_cap must be nonnegative");
    return x < 1.0 ? CutEdgeCap::fraction(x) : CutEdgeCap{CutEdgeCap::Kind::Absolute, x};
}

std::string describe_cut_cap(const CutEdgeCap& cap) {
    std::ostringstream out;
    out.precision(17);
    out << (cap.kind == CutEdgeCap::Kind::Absolute ? "abs:" : "frac:") << cap.value;
    return out.str();
}

}  // namespace

std::string to_string(ChainKind kind) {
    switch (kind) {
        case ChainKind::Flip: return "flip";
        case ChainKind::UniformFlip: return "uniform-flip";
        case ChainKind::UniformFlipFast: return "uniform-flip-fast";
        case ChainKind::Recom: return "recom";
        case ChainKind::RecomGeneral: return "recom-general";
    }
    return "?";
}

std::string to_string(SeedMethod method) {
    switch (method) {
        case SeedMethod::Stripes: return "stripes";
        case SeedMethod::File: return "file";
        case SeedMethod::RecursiveTree: return "recursive-tree";
        case SeedMethod::FloodFill: return "flood-fill";
    }
    return "?";
}

ChainKind parse_chain_kind(const std::string& text) {
    for (ChainKind k : {ChainKind::Flip, ChainKind::UniformFlip, ChainKind::UniformFlipFast, ChainKind::Recom,
                        ChainKind::RecomGeneral}) {
        if (text == to_string(k)) return k;
    }
    throw ConfigError("unknown chain '" + text + "'");
}

SeedMethod parse_seed_method(const std::string& text) {
    for (SeedMethod m : {SeedMethod::Stripes, SeedMethod::File, SeedMethod::RecursiveTree, SeedMethod::FloodFill}) {
        if (text == to_string(m)) return m;
    }
    throw ConfigError("unknown seed method '" + text + "'");
}

VotePattern VotePattern::parse(const std::string& text) {
    if (text == "none") return {};
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string kind = text.substr(0, colon);
        const int extent = parse_int("pattern", text.substr(colon + 1));
        if (kind == "rows") return {Kind::Rows, extent};
        if (kind == "cols") return {Kind::Cols, extent};
    }
    throw ConfigError("vote pattern is none, rows:M or cols:M, got '" + text + "'");
}

std::string VotePattern::describe() const {
    switch (kind) {
        case Kind::None: return "none";
        case Kind::Rows: return "rows:" + std::to_string(extent);
        case Kind::Cols: return "cols:" + std::to_string(extent);
    }
    return "none";
}

std::shared_ptr<const DualGraph> make_grid_graph(int rows, int cols, const VotePattern& pattern) {
    if (rows < 1 || cols < 1) throw ConfigError("grid dimensions must be positive");
    std::map<std::string, std::vector<double>> attrs;
    if (pattern.kind != VotePattern::Kind::None) {
        const int limit = pattern.kind == VotePattern::Kind::Rows ? rows : cols;
        if (pattern.extent < 0 || pattern.extent > limit) throw ConfigError("vote pattern extent exceeds the grid");
        std::vector<double> a(static_cast<std::size_t>(rows) * cols);
        std::vector<double> b(a.size());
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                const bool votes_a = (pattern.kind == VotePattern::Kind::Rows ? r : c) < pattern.extent;
                a[r * cols + c] = votes_a ? 1.0 : 0.0;
                b[r * cols + c] = votes_a ? 0.0 : 1.0;
            }
        }
        attrs["A"] = std::move(a);
        attrs["B"] = std::move(b);
    }
    return std::make_shared<const DualGraph>(make_lattice(rows, cols, std::move(attrs)));
}

GridInstance make_grid(int n, int k_stripes, const VotePattern& pattern) {
    if (n < 1 || k_stripes < 1) throw ConfigError("make_grid: n and k must be positive");
    if (n % k_stripes != 0) {
        throw ConfigError("make_grid: " + std::to_string(k_stripes) + " stripes do not divide n = " +
                          std::to_string(n));
    }
    auto graph = make_grid_graph(n, n, pattern);
    Partition partition(graph, stripes_assignment(n, n, k_stripes), k_stripes);
    return {std::move(graph), std::move(partition)};
}

// ---------------------------------------------------------------------------
// configuration

void RunConfig::set(const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "graph") {
        graph_path = value;
    } else if (key == "grid") {
        const auto x = value.find_first_of("xX");
        if (x == std::string::npos) {
            grid_rows = grid_cols = parse_int(key, value);
        } else {
            grid_rows = parse_int(key, value.substr(0, x));
            grid_cols = parse_int(key, value.substr(x + 1));
        }
    } else if (key == "pattern") {
        pattern = VotePattern::parse(value);
    } else if (key == "districts") {
        districts = parse_int(key, value);
    } else if (key == "seed_method") {
        seed_method = parse_seed_method(value);
    } else if (key == "assignment") {
        assignment_path = value;
    } else if (key == "seed_epsilon") {
        seed_epsilon = parse_double(key, value);
    } else if (key == "chain") {
        chain = parse_chain_kind(value);
    } else if (key == "merge_count") {
        merge_count = parse_int(key, value);
    } else if (key == "steps") {
        steps = parse_count(key, value);
    } else if (key == "burn") {
        burn_in = parse_count(key, value);
    } else if (key == "interval") {
        interval = parse_count(key, value);
    } else if (key == "assignment_every") {
        assignment_every = parse_count(key, value);
    } else if (key == "pop_tol") {
        if (value == "none") {
            pop_tolerance.reset();
        } else {
            pop_tolerance = parse_double(key, value);
        }
    } else if (key == "cut_cap") {
        if (value == "none") {
            cut_edge_cap.reset();
        } else {
            cut_edge_cap = parse_cut_cap(value);
        }
    } else if (key == "contiguity") {
        require_contiguity = parse_bool(key, value);
    } else if (key == "recom_epsilon") {
        recom_epsilon = parse_double(key, value);
    } else if (key == "pair_weighting") {
        if (value == "cut-edges") {
            pair_weighting = PairWeighting::CutEdges;
        } else if (value == "district-pairs") {
            pair_weighting = PairWeighting::DistrictPairs;
        } else {
            throw ConfigError("pair_weighting is cut-edges or district-pairs");
        }
    } else if (key == "max_tree_redraws") {
        max_tree_redraws = parse_int(key, value);
    } else if (key == "max_degree") {
        max_degree = parse_double(key, value);
    } else if (key == "retry_ceiling") {
        retry_ceiling = parse_count(key, value);
    } else if (key == "beta_schedule") {
        schedule = WeightSchedule::parse(value);
    } else if (key == "replicas") {
        replicas = parse_int(key, value);
    } else if (key == "swap_interval") {
        swap_interval = parse_count(key, value);
    } else if (key == "stats") {
        stats = split_list(value);
    } else if (key == "election_a") {
        election_a = value;
    } else if (key == "election_b") {
        election_b = value;
    } else if (key == "unit_column") {
        unit_column = value;
    } else if (key == "rng_seed") {
        rng_seed = parse_count(key, value);
    } else if (key == "out") {
        out_path = value;
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig RunConfig::parse(std::istream& in) {
    RunConfig config;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
        config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse(in);
}

void RunConfig::validate() const {
    const bool has_grid = grid_rows > 0 && grid_cols > 0;
    if (has_grid == !graph_path.empty()) throw ConfigError("exactly one of graph or grid must be given");
    if (steps < burn_in) throw ConfigError("burn exceeds steps");
    if (interval < 1) throw ConfigError("interval must be at least 1");
    if (seed_method == SeedMethod::File) {
        if (assignment_path.empty()) throw ConfigError("seed_method file needs an assignment path");
    } else if (districts < 1) {
        throw ConfigError("districts must be at least 1");
    }
    if (seed_method == SeedMethod::Stripes && !has_grid) throw ConfigError("stripe seeds need a grid");
    if (pop_tolerance && !(*pop_tolerance >= 0.0)) throw ConfigError("pop_tol must be nonnegative");
    if (replicas < 1) throw ConfigError("replicas must be at least 1");
    if (replicas > 1 && chain == ChainKind::UniformFlipFast) {
        throw ConfigError("tempering is not supported with uniform-flip-fast");
    }
    if (replicas > 1 && swap_interval < 1) throw ConfigError("swap_interval must be at least 1");
    if (chain == ChainKind::RecomGeneral && merge_count < 2) throw ConfigError("merge_count must be at least 2");
    if (max_degree && !(*max_degree > 0.0)) throw ConfigError("max_degree must be positive");
    const double eps = effective_recom_epsilon();
    if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("recom epsilon must lie in [0, 1)");
}

double RunConfig::effective_recom_epsilon() const { return recom_epsilon.value_or(pop_tolerance.value_or(0.05)); }

ConstraintSet RunConfig::constraint_set() const {
    ConstraintSet c;
    c.pop_tolerance = pop_tolerance;
    c.cut_edge_cap = cut_edge_cap;
    c.require_contiguity = require_contiguity;
    return c;
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    if (!graph_path.empty()) j["graph"] = graph_path;
    if (grid_rows > 0) j["grid"] = std::to_string(grid_rows) + "x" + std::to_string(grid_cols);
    j["pattern"] = pattern.describe();
    j["districts"] = districts;
    j["seed_method"] = to_string(seed_method);
    if (!assignment_path.empty()) j["assignment"] = assignment_path;
    if (seed_epsilon) j["seed_epsilon"] = *seed_epsilon;
    j["chain"] = to_string(chain);
    if (chain == ChainKind::RecomGeneral) j["merge_count"] = merge_count;
    j["steps"] = steps;
    j["burn"] = burn_in;
    j["interval"] = interval;
    j["assignment_every"] = assignment_every;
    j["pop_tol"] = pop_tolerance ? nlohmann::ordered_json(*pop_tolerance) : nlohmann::ordered_json("none");
    j["cut_cap"] = cut_edge_cap ? describe_cut_cap(*cut_edge_cap) : std::string("none");
    j["contiguity"] = require_contiguity;
    j["recom_epsilon"] = effective_recom_epsilon();
    j["pair_weighting"] = pair_weighting == PairWeighting::CutEdges ? "cut-edges" : "district-pairs";
    j["max_tree_redraws"] = max_tree_redraws;
    if (max_degree) j["max_degree"] = *max_degree;
    if (retry_ceiling) j["retry_ceiling"] = *retry_ceiling;
    j["beta_schedule"] = schedule.describe();
    j["replicas"] = replicas;
    j["swap_interval"] = swap_interval;
    j["stats"] = stats;
    j["election_a"] = election_a;
    j["election_b"] = election_b;
    if (!unit_column.empty()) j["unit_column"] = unit_column;
    j["rng_seed"] = rng_seed;
    if (!out_path.empty()) j["out"] = out_path;
    return j;
}

// ---------------------------------------------------------------------------
// setup and statistics

PreparedRun prepare_run(const RunConfig& config) {
    config.validate();
    std::shared_ptr<const DualGraph> graph;
    if (!config.graph_path.empty()) {
        graph = std::make_shared<const DualGraph>(DualGraph::load(config.graph_path));
    } else {
        graph = make_grid_graph(config.grid_rows, config.grid_cols, config.pattern);
    }
    RandomSource rng(config.rng_seed, kSeedStream);
    const double eps = config.seed_epsilon.value_or(config.pop_tolerance.value_or(0.05));
    switch (config.seed_method) {
        case SeedMethod::Stripes: {
            if (config.grid_cols % config.districts != 0) {
                throw ConfigError("stripe seed: districts do not divide the grid width");
            }
            Partition p(graph, stripes_assignment(config.grid_rows, config.grid_cols, config.districts),
                        config.districts);
            return {graph, std::move(p), 0};
        }
        case SeedMethod::File: {
            auto [labels, k] = read_assignment_csv(*graph, config.assignment_path);
            if (config.districts > 0 && config.districts != k) {
                throw ConfigError("assignment has " + std::to_string(k) + " districts, config says " +
                                  std::to_string(config.districts));
            }
            return {graph, Partition(graph, std::move(labels), k), 0};
        }
        case SeedMethod::RecursiveTree: {
            Seed seed = recursive_tree_seed(graph, config.districts, eps, rng);
            return {graph, std::move(seed.partition), seed.restarts};
        }
        case SeedMethod::FloodFill: {
            Seed seed = flood_fill_seed(graph, config.districts, eps, rng);
            return {graph, std::move(seed.partition), seed.restarts};
        }
    }
    throw ConfigError("unknown seed method");
}

std::vector<std::string> default_stats(const DualGraph& graph, const RunConfig& config) {
    std::vector<std::string> names{"cut_edges", "boundary_fraction", "population_deviation"};
    if (graph.has_attribute(config.election_a) && graph.has_attribute(config.election_b)) {
        for (const char* name : {"seats", "ties", "shares", "mean_median"}) names.emplace_back(name);
    }
    return names;
}

nlohmann::ordered_json compute_stats(const Partition& partition, const std::vector<std::string>& names,
                                     const RunConfig& config) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    const ElectionSpec election{config.election_a, config.election_b, false};
    std::optional<std::vector<double>> shares;
    std::optional<SeatCount> seats;
    auto get_shares = [&]() -> const std::vector<double>& {
        if (!shares) shares = vote_shares(partition, election);
        return *shares;
    };
    auto get_seats = [&]() -> const SeatCount& {
        if (!seats) seats = seat_count(partition, election);
        return *seats;
    };
    for (const std::string& name : names) {
        if (name == "cut_edges") {
            out[name] = cut_edge_count(partition);
        } else if (name == "cut_edge_fraction") {
            out[name] = cut_edge_fraction(partition);
        } else if (name == "boundary_fraction") {
            out[name] = boundary_node_fraction(partition);
        } else if (name == "population_deviation") {
            out[name] = population_deviation(partition);
        } else if (name == "seats") {
            out[name] = get_seats().won;
        } else if (name == "ties") {
            out[name] = get_seats().tied;
        } else if (name == "shares") {
            out[name] = get_shares();
        } else if (name == "mean_median") {
            out[name] = mean_median(get_shares());
        } else if (name == "max_share") {
            out[name] = get_shares().back();
        } else if (name == "tree_score") {
            out[name] = log_partition_tree_score(partition);
        } else if (name == "units_split") {
            if (config.unit_column.empty()) throw ConfigError("units_split needs unit_column");
            out[name] = units_split(partition, config.unit_column);
        } else {
            throw ConfigError("unknown statistic '" + name + "'");
        }
    }
    return out;
}

nlohmann::ordered_json EnsembleRecord::to_json() const {
    nlohmann::ordered_json j;
    j["type"] = "record";
    j["step"] = step;
    j["stats"] = stats;
    if (assignment) j["assignment"] = *assignment;
    return j;
}

EnsembleRecord EnsembleRecord::from_json(const nlohmann::json& line) {
    EnsembleRecord r;
    r.step = line.at("step").get<std::uint64_t>();
    r.stats = line.at("stats");
    if (line.contains("assignment")) r.assignment = line.at("assignment").get<std::vector<District>>();
    return r;
}

// ---------------------------------------------------------------------------
// chain execution

namespace {

struct Transition {
    std::uint64_t wait = 1;
    bool accepted = false;
    bool proposed = false;
    std::optional<FlipMove> move;
};

class ChainDriver {
public:
    ChainDriver(const RunConfig& config, const DualGraph& graph)
        : config_(config),
          constraints_(config.constraint_set()),
          max_degree_(config.max_degree.value_or(default_max_degree(graph))),
          partitioner_(spanning_tree_partitioner(config.effective_recom_epsilon(),
                                                 TreePartitionOptions{config.max_tree_redraws, 50})) {
        recom_.epsilon = config.effective_recom_epsilon();
        recom_.pair_weighting = config.pair_weighting;
        recom_.max_tree_redraws = config.max_tree_redraws;
        recom_.merge_count = config.merge_count;
        recom_needs_check_ = constraints_.pop_tolerance || constraints_.cut_edge_cap || !constraints_.custom.empty();
    }

    Transition step(Partition& p, RandomSource& rng, double beta) {
        switch (config_.chain) {
            case ChainKind::Flip: return flip(p, rng, beta);
            case ChainKind::UniformFlip: return uniform(p, rng, beta, false);
            case ChainKind::UniformFlipFast: return uniform(p, rng, beta, true);
            case ChainKind::Recom:
            case ChainKind::RecomGeneral: return recom(p, rng, beta);
        }
        return {};
    }

private:
    Transition flip(Partition& p, RandomSource& rng, double beta) {
        Transition t;
        t.proposed = true;
        if (beta == 0.0) {
            t.move = flip_advance(p, constraints_, rng, config_.retry_ceiling);
            t.accepted = true;
            return t;
        }
        const std::size_t ceiling = config_.retry_ceiling.value_or(10 * p.pair_count());
        for (std::size_t attempt = 0; attempt < ceiling; ++attempt) {
            const FlipMove move = node_choice(p, rng);
            if (!constraints_.check_flip(p, move)) continue;
            if (metropolis_accept(p.cut_delta(move.node, move.to), beta, rng)) {
                p.flip(move.node, move.to);
                t.move = move;
                t.accepted = true;
            }
            return t;
        }
        throw StuckChainError("flip: no valid proposal in " + std::to_string(ceiling) + " draws");
    }

    Transition uniform(Partition& p, RandomSource& rng, double beta, bool fast) {
        Transition t;
        if (beta == 0.0) {
            const FlipStepResult r = fast ? uniform_flip_fast_advance(p, constraints_, max_degree_, rng)
                                          : uniform_flip_advance(p, constraints_, max_degree_, rng);
            t.wait = r.wait;
            t.accepted = r.accepted;
            t.proposed = r.move.has_value();
            if (r.accepted) t.move = r.move;
            return t;
        }
        const double prob = uniform_flip_move_probability(p, max_degree_);
        if (fast) {
            if (prob == 0.0) throw PartitionError("uniform flip needs at least one cut edge");
            t.wait = rng.geometric(prob);
        } else if (!rng.bernoulli(prob)) {
            return t;
        }
        const FlipMove move = node_choice(p, rng);
        t.proposed = true;
        if (constraints_.check_flip(p, move) && metropolis_accept(p.cut_delta(move.node, move.to), beta, rng)) {
            p.flip(move.node, move.to);
            t.move = move;
            t.accepted = true;
        }
        return t;
    }

    Transition recom(Partition& p, RandomSource& rng, double beta) {
        Transition t;
        t.proposed = true;
        const bool filter = recom_needs_check_ || beta > 0.0;
        std::vector<District> before;
        const long cut_before = static_cast<long>(p.cut_edges().size());
        if (filter) before.assign(p.assignment().begin(), p.assignment().end());
        if (config_.chain == ChainKind::Recom) {
            recom_advance(p, recom_, rng);
        } else {
            recom_general_advance(p, config_.merge_count, partitioner_, rng);
        }
        t.accepted = true;
        if (!filter) return t;
        const long delta = static_cast<long>(p.cut_edges().size()) - cut_before;
        if ((!recom_needs_check_ || constraints_.check(p)) && metropolis_accept(delta, beta, rng)) return t;
        std::vector<NodeId> nodes;
        std::vector<District> labels;
        for (NodeId v = 0; v < p.node_count(); ++v) {
            if (p[v] != before[v]) {
                nodes.push_back(v);
                labels.push_back(before[v]);
            }
        }
        p.reassign(nodes, labels);
        t.accepted = false;
        return t;
    }

    const RunConfig& config_;
    ConstraintSet constraints_;
    double max_degree_;
    RecomConfig recom_;
    RegionPartitioner partitioner_;
    bool recom_needs_check_ = false;
};

class Recorder {
public:
    Recorder(const RunConfig& config, std::vector<std::string> names, const RecordSink& sink)
        : config_(config), names_(std::move(names)), sink_(sink) {}

    bool due(std::uint64_t step) const {
        return step > config_.burn_in && step <= config_.steps && (step - config_.burn_in) % config_.interval == 0;
    }

    /// First due step in [lo, hi], if any.
    std::optional<std::uint64_t> first_due(std::uint64_t lo, std::uint64_t hi) const {
        hi = std::min(hi, config_.steps);
        lo = std::max(lo, config_.burn_in + 1);
        if (lo > hi) return std::nullopt;
        const std::uint64_t offset = (lo - config_.burn_in) % config_.interval;
        const std::uint64_t s = offset == 0 ? lo : lo + (config_.interval - offset);
        if (s > hi) return std::nullopt;
        return s;
    }

    void emit(std::uint64_t step, const Partition& p) {
        EnsembleRecord r;
        r.step = step;
        r.stats = compute_stats(p, names_, config_);
        ++count_;
        if (config_.assignment_every > 0 && count_ % config_.assignment_every == 0) {
            r.assignment = std::vector<District>(p.assignment().begin(), p.assignment().end());
        }
        sink_(r);
    }

    /// Emit every due step in [lo, hi] with the same plan.
    void emit_range(std::uint64_t lo, std::uint64_t hi, const Partition& p) {
        for (auto s = first_due(lo, hi); s && *s <= std::min(hi, config_.steps); s = *s + config_.interval) {
            emit(*s, p);
        }
    }

    std::uint64_t count() const { return count_; }

private:
    const RunConfig& config_;
    std::vector<std::string> names_;
    const RecordSink& sink_;
    std::uint64_t count_ = 0;
};

template <typename F>
auto annotate(std::uint64_t step, F&& f) {
    try {
        return f();
    } catch (const RunAbortedError&) {
        throw;
    } catch (const Error& e) {
        throw RunAbortedError(step, e.what());
    }
}

RunSummary run_single(const RunConfig& config, Partition state, Recorder& recorder) {
    ChainDriver driver(config, state.graph());
    RandomSource rng(config.rng_seed, 0);
    RunSummary summary;
    std::uint64_t t = 0;
    while (t < config.steps) {
        const double beta = config.schedule.beta(t);
        const Transition tr = annotate(t + 1, [&] { return driver.step(state, rng, beta); });
        summary.accepted += tr.accepted;
        summary.proposals += tr.proposed;
        if (tr.wait > 1 && recorder.first_due(t + 1, t + tr.wait - 1)) {
            // the plan held before this transition covers steps t+1 .. t+wait-1
            if (tr.move) state.flip(tr.move->node, tr.move->from);
            recorder.emit_range(t + 1, t + tr.wait - 1, state);
            if (tr.move) state.flip(tr.move->node, tr.move->to);
        }
        t += tr.wait;
        if (recorder.due(t)) recorder.emit(t, state);
    }
    summary.steps = config.steps;
    summary.records = recorder.count();
    return summary;
}

RunSummary run_tempered(const RunConfig& config, const Partition& start, Recorder& recorder) {
    const int r = config.replicas;
    struct Replica {
        Partition state;
        RandomSource rng;
        std::uint64_t accepted = 0;
        std::uint64_t proposals = 0;
    };
    std::vector<Replica> replicas;
    replicas.reserve(r);
    for (int i = 0; i < r; ++i) {
        replicas.push_back({start, RandomSource(config.rng_seed, static_cast<std::uint64_t>(i) + 1), 0, 0});
    }
    std::vector<int> levels(r);
    for (int i = 0; i < r; ++i) levels[i] = i;
    RandomSource swap_rng(config.rng_seed, 0);
    const ChainDriver prototype(config, start.graph());

    std::uint64_t t = 0;
    while (t < config.steps) {
        const std::uint64_t segment_end = std::min(config.steps, t + config.swap_interval);
        std::vector<std::exception_ptr> failures(r);
        std::vector<std::thread> threads;
        for (int i = 0; i < r; ++i) {
            threads.emplace_back([&, i] {
                try {
                    ChainDriver driver = prototype;
                    Replica& rep = replicas[i];
                    const bool top = levels[i] == r - 1;
                    for (std::uint64_t s = t; s < segment_end; ++s) {
                        const double beta = config.schedule.beta(s) * levels[i] / (r - 1);
                        const Transition tr = annotate(s + 1, [&] { return driver.step(rep.state, rep.rng, beta); });
                        rep.accepted += tr.accepted;
                        rep.proposals += tr.proposed;
                        // only the top rung's thread touches the recorder in a segment
                        if (top && recorder.due(s + 1)) recorder.emit(s + 1, rep.state);
                    }
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            });
        }
        for (auto& th : threads) th.join();
        for (auto& f : failures) {
            if (f) std::rethrow_exception(f);
        }
        t = segment_end;
        if (t < config.steps) {
            std::vector<long> cuts(r);
            for (int i = 0; i < r; ++i) cuts[i] = static_cast<long>(replicas[i].state.cut_edges().size());
            std::vector<double> ladder(r);
            for (int rung = 0; rung < r; ++rung) ladder[rung] = config.schedule.beta(t) * rung / (r - 1);
            levels = tempering_swap_levels(cuts, levels, ladder, swap_rng);
        }
    }
    RunSummary summary;
    for (const Replica& rep : replicas) {
        summary.accepted += rep.accepted;
        summary.proposals += rep.proposals;
    }
    summary.steps = config.steps;
    summary.records = recorder.count();
    return summary;
}

}  // namespace

RunSummary run_chain(const RunConfig& config, const Partition& start, const RecordSink& sink) {
    config.validate();
    const ConstraintSet constraints = config.constraint_set();
    if (!constraints.check(start)) throw ConfigError("starting plan violates the constraint set");
    std::vector<std::string> names = config.stats.empty() ? default_stats(start.graph(), config) : config.stats;
    compute_stats(start, names, config);  // reject unknown names before running
    Recorder recorder(config, std::move(names), sink);
    if (config.replicas > 1) return run_tempered(config, start, recorder);
    return run_single(config, start, recorder);
}

RunSummary run_chain(const RunConfig& config, const RecordSink& sink) {
    PreparedRun prepared = prepare_run(config);
    RunSummary summary = run_chain(config, prepared.initial, sink);
    summary.seed_restarts = prepared.seed_restarts;
    return summary;
}

RunSummary write_ensemble(const RunConfig& config, std::ostream& out) {
    PreparedRun prepared = prepare_run(config);
    const std::vector<std::string> names =
        config.stats.empty() ? default_stats(*prepared.graph, config) : config.stats;
    nlohmann::ordered_json header;
    header["type"] = "header";
    header["generator"] = std::string(RandomSource::kGeneratorName);
    header["config"] = config.to_json();
    header["nodes"] = prepared.graph->node_count();
    header["edges"] = prepared.graph->edge_count();
    header["districts"] = prepared.initial.k();
    header["seed_restarts"] = prepared.seed_restarts;
    header["stats"] = names;
    out << header.dump() << '\n';
    RunSummary summary = run_chain(config, prepared.initial, [&](const EnsembleRecord& r) {
        out << r.to_json().dump() << '\n';
    });
    summary.seed_restarts = prepared.seed_restarts;
    nlohmann::ordered_json footer;
    footer["type"] = "summary";
    footer["steps"] = summary.steps;
    footer["records"] = summary.records;
    footer["accepted"] = summary.accepted;
    footer["proposals"] = summary.proposals;
    out << footer.dump() << '\n';
    return summary;
}

// ---------------------------------------------------------------------------
// ensembles

Ensemble read_ensemble(std::istream& in) {
    Ensemble e;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw ConfigError("ensemble line " + std::to_string(number) + ": " + ex.what());
        }
        const std::string type = j.value("type", "record");
        if (type == "header") {
            e.header = std::move(j);
        } else if (type == "summary") {
            e.summary = std::move(j);
        } else {
            e.records.push_back(EnsembleRecord::from_json(j));
        }
    }
    return e;
}

Ensemble read_ensemble(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open ensemble " + path.string());
    return read_ensemble(in);
}

std::vector<EnsembleRecord> winnow(const std::vector<EnsembleRecord>& records, const RecordPredicate& keep) {
    std::vector<EnsembleRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out), keep);
    return out;
}

RecordPredicate parse_predicate(const std::string& text) {
    static const std::regex pattern(R"(^\s*([A-Za-z_]\w*)\s*(<=|>=|==|!=|<|>)\s*(\S+)\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, pattern)) throw ConfigError("predicate is 'name OP value', got '" + text + "'");
    const std::string name = m[1];
    const std::string op = m[2];
    const double value = parse_double("predicate", m[3]);
    return [name, op, value](const EnsembleRecord& r) {
        if (!r.stats.contains(name) || !r.stats[name].is_number()) {
            throw ConfigError("record has no numeric statistic '" + name + "'");
        }
        const double x = r.stats[name].get<double>();
        if (op == "<") return x < value;
        if (op == "<=") return x <= value;
        if (op == ">") return x > value;
        if (op == ">=") return x >= value;
        if (op == "==") return x == value;
        return x != value;
    };
}

std::map<long, std::uint64_t> histogram(const std::vector<EnsembleRecord>& records, const std::string& name) {
    std::map<long, std::uint64_t> h;
    for (const auto& r : records) {
        if (!r.stats.contains(name) || !r.stats[name].is_number()) {
            throw ConfigError("record has no numeric statistic '" + name + "'");
        }
        ++h[std::lround(r.stats[name].get<double>())];
    }
    return h;
}

void write_vector_csv(const std::vector<EnsembleRecord>& records, const std::string& name, std::ostream& out) {
    std::size_t width = 0;
    for (const auto& r : records) {
        if (!r.stats.contains(name) || !r.stats[name].is_array()) {
            throw ConfigError("record has no vector statistic '" + name + "'");
        }
        width = std::max(width, r.stats[name].size());
    }
    out << "step";
    for (std::size_t i = 1; i <= width; ++i) out << ',' << name << '_' << i;
    out << '\n';
    out.precision(17);
    for (const auto& r : records) {
        out << r.step;
        for (const auto& v : r.stats[name]) out << ',' << v.get<double>();
        out << '\n';
    }
}

}  // namespace dchain
