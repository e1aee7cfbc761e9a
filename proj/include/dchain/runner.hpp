#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dchain/constraints.hpp"
#include "dchain/error.hpp"
#include "dchain/partition.hpp"
#include "dchain/recom.hpp"
#include "dchain/stats.hpp"

namespace dchain {

enum class ChainKind { Flip, UniformFlip, UniformFlipFast, Recom, RecomGeneral };
enum class SeedMethod { Stripes, File, RecursiveTree, FloodFill };

std::string to_string(ChainKind kind);
std::string to_string(SeedMethod method);
ChainKind parse_chain_kind(const std::string& text);
SeedMethod parse_seed_method(const std::string& text);

/// Synthetic vote layout on a grid: party A holds the first `extent` rows
/// or columns, party B everything else.
struct VotePattern {
    enum class Kind { None, Rows, Cols };
    Kind kind = Kind::None;
    int extent = 0;

    /// "none", "rows:M" or "cols:M".
    static VotePattern parse(const std::string& text);
    std::string describe() const;
};

struct GridInstance {
    std::shared_ptr<const DualGraph> graph;
    Partition partition;
};

/// n x n lattice, unit populations, columns "A" and "B" (one vote per node)
/// unless the pattern is none, seeded with k vertical stripes. Throws
/// ConfigError unless k divides n.
GridInstance make_grid(int n, int k_stripes, const VotePattern& pattern);
/// rows x cols lattice with the vote columns but no partition.
std::shared_ptr<const DualGraph> make_grid_graph(int rows, int cols, const VotePattern& pattern);

struct RunConfig {
    // graph source: a JSON file, or a rows x cols grid
    std::string graph_path;
    int grid_rows = 0;
    int grid_cols = 0;
    VotePattern pattern;
    int districts = 0;

    SeedMethod seed_method = SeedMethod::Stripes;
    std::string assignment_path;
    std::optional<double> seed_epsilon;

    ChainKind chain = ChainKind::Flip;
    int merge_count = 2;
    std::uint64_t steps = 1000;
    std::uint64_t burn_in = 0;
    std::uint64_t interval = 1;
    /// Full assignment on every Nth emitted record; 0 never.
    std::uint64_t assignment_every = 100;

    std::optional<double> pop_tolerance;
    std::optional<CutEdgeCap> cut_edge_cap;
    bool require_contiguity = true;

    /// ReCom balance tolerance; falls back to pop_tolerance, then 0.05.
    std::optional<double> recom_epsilon;
    PairWeighting pair_weighting = PairWeighting::CutEdges;
    int max_tree_redraws = 1000;
    /// Uniform flip self-loop scale M; defaults to 2|E|.
    std::optional<double> max_degree;
    std::optional<std::size_t> retry_ceiling;

    WeightSchedule schedule;
    int replicas = 1;
    std::uint64_t swap_interval = 100;

    std::vector<std::string> stats;
    std::string election_a = "A";
    std::string election_b = "B";
    std::string unit_column;

    std::uint64_t rng_seed = 0;
    std::string out_path;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
    double effective_recom_epsilon() const;
    ConstraintSet constraint_set() const;
    nlohmann::ordered_json to_json() const;

    /// Apply one `key = value` setting; throws ConfigError for unknown keys.
    void set(const std::string& key, const std::string& value);
    /// Flat `key = value` lines; `#` starts a comment.
    static RunConfig parse(std::istream& in);
    static RunConfig load(const std::filesystem::path& path);
};

/// Graph and starting plan described by a config. `restarts` reports
/// failed seed attempts.
struct PreparedRun {
    std::shared_ptr<const DualGraph> graph;
    Partition initial;
    int seed_restarts = 0;
};

PreparedRun prepare_run(const RunConfig& config);

/// Default statistics for a graph: cut/boundary/population measures, plus
/// election statistics when the vote columns exist.
std::vector<std::string> default_stats(const DualGraph& graph, const RunConfig& config);

/// Evaluate named statistics on a plan. Known names: cut_edges,
/// cut_edge_fraction, boundary_fraction, population_deviation, seats, ties,
/// shares, mean_median, max_share, tree_score, units_split.
nlohmann::ordered_json compute_stats(const Partition& partition, const std::vector<std::string>& names,
                                     const RunConfig& config);

struct EnsembleRecord {
    std::uint64_t step = 0;
    nlohmann::ordered_json stats;
    std::optional<std::vector<District>> assignment;

    nlohmann::ordered_json to_json() const;
    static EnsembleRecord from_json(const nlohmann::json& line);
};

struct RunSummary {
    std::uint64_t steps = 0;
    std::uint64_t records = 0;
    std::uint64_t accepted = 0;
    std::uint64_t proposals = 0;
    int seed_restarts = 0;
};

/// Chain failure annotated with the step at which it happened.
class RunAbortedError : public Error {
public:
    RunAbortedError(std::uint64_t step, const std::string& what)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
    std::uint64_t step() const { return step_; }

private:
    std::uint64_t step_;
};

using RecordSink = std::function<void(const EnsembleRecord&)>;

/// Run the configured chain for `steps` steps from `start`, discarding the
/// first burn_in states and emitting every interval-th state after that, so
/// floor((steps - burn_in) / interval) records. For uniform-flip-fast every
/// state counts `wait` steps. With replicas > 1, replica rungs run at
/// beta(step) * rung / (R - 1) and the record comes from the top rung.
/// Deterministic given the config and rng_seed.
RunSummary run_chain(const RunConfig& config, const Partition& start, const RecordSink& sink);
RunSummary run_chain(const RunConfig& config, const RecordSink& sink);

/// JSON-lines ensemble: a header line, one line per record, a summary line.
RunSummary write_ensemble(const RunConfig& config, std::ostream& out);

struct Ensemble {
    nlohmann::json header;
    std::vector<EnsembleRecord> records;
    nlohmann::json summary;
};

Ensemble read_ensemble(std::istream& in);
Ensemble read_ensemble(const std::filesystem::path& path);

using RecordPredicate = std::function<bool(const EnsembleRecord&)>;

/// Records satisfying the predicate, order preserved.
std::vector<EnsembleRecord> winnow(const std::vector<EnsembleRecord>& records, const RecordPredicate& keep);

/// "name OP value" with OP in <, <=, >, >=, ==, != on a numeric statistic.
RecordPredicate parse_predicate(const std::string& text);

/// Histogram of an integer-valued statistic.
std::map<long, std::uint64_t> histogram(const std::vector<EnsembleRecord>& records, const std::string& name);

/// One CSV row per record of a vector statistic (e.g. shares): step then values.
void write_vector_csv(const std::vector<EnsembleRecord>& records, const std::string& name, std::ostream& out);

}  // namespace dchain
