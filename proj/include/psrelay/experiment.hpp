#ifndef PSRELAY_EXPERIMENT_HPP
#define PSRELAY_EXPERIMENT_HPP

#include "psrelay/comparators.hpp"
#include "psrelay/planner.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

// Experiment harness: JSON configuration, deterministic per-trial seeding,
// Monte Carlo sweeps across SNR and strategies, and CSV/JSON emission.
// Everything downstream of (config, master seed) is byte-deterministic.

namespace psrelay {

struct SnrSweep {
    double start_db = 0.0;
    double step_db = 5.0;
    double stop_db = 20.0;

    std::vector<double> points() const;
};

struct ExperimentConfig {
    SystemParams system; // system.P is overridden per sweep point: P = sigma_D2 * 10^(dB/10)
    FadingParams fading;
    std::vector<std::string> strategies{"optimal", "markov", "greedy"};
    SnrSweep sweep;
    int trials = 1;
    std::uint64_t master_seed = 1;
    int workers = 1;
    std::string out = "results";
    SolverSettings solver;
    ComparatorConfig comparator;

    void validate() const; // diagnostics name the offending field
};

// The strategy tags cmd_run understands.
const std::vector<std::string>& known_strategies();
// Strategy set used by the `compare` subcommand.
const std::vector<std::string>& comparison_strategies();

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct ResultRow {
    std::string strategy;
    double snr_db = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    double r_total = 0.0;
    std::vector<double> per_slot;
    long embedded_calls = 0;
    long dinkelbach_iters = 0;
};

// SplitMix64 chain over (master, snr index, trial). The strategy tag is
// deliberately absent so all strategies see the same trace per (snr, trial).
std::uint64_t derive_trial_seed(std::uint64_t master, int snr_index, int trial);

// Executes one strategy tag on a trace. `table` is consulted only by the
// markov strategy and may be null otherwise.
PlanResult run_strategy(const std::string& tag, const ChannelTrace& trace,
                        const SystemParams& params, const ExperimentConfig& cfg,
                        const PolicyTable* table, std::uint64_t trial_seed);

// Full sweep; rows ordered by (strategy in config order, snr point, trial).
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

// results-v1 schema; the header row is the single source of column order.
void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& os);

// Mean and sample standard deviation of r_total per (strategy, snr) cell.
nlohmann::json summarize_results(const std::vector<ResultRow>& rows);

// FNV-1a over the canonical parameter serialization.
std::uint64_t params_hash(const SystemParams& system, const FadingParams& fading);

// Policy-table persistence (psrelay-policy-table-v1). Loading recomputes the
// hash from the expected parameters and refuses a mismatched file.
void save_policy_table(const PolicyTable& table, const FadingParams& fading,
                       std::ostream& os);
PolicyTable load_policy_table(std::istream& is, const SystemParams& system,
                              const FadingParams& fading);

struct ConvergenceRow {
    int instance = 0;
    int sweep = 0;
    int relay = 0;
    int iter = 0; // Dinkelbach iteration within this coordinate update
    double q = 0.0;
    double f = 0.0;
    double j = 0.0; // objective after the coordinate update
};

// Solver iteration traces on random embedded instances (random channel,
// random battery state, random feasible variation) at the config's first
// sweep point.
std::vector<ConvergenceRow> convergence_traces(const ExperimentConfig& cfg, int instances);
void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os);

// Runs fn(0..n-1) on `workers` threads; results must be written to
// preallocated slots so the outcome is order-independent.
void parallel_for_indexed(long n, int workers, const std::function<void(long)>& fn);

} // namespace psrelay

#endif
