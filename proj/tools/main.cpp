#include "psrelay/experiment.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace {

using psrelay::ExperimentConfig;

ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return ExperimentConfig{};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return psrelay::config_from_json(j);
}

struct Overrides {
    std::string config_path;
    std::uint64_t seed = 0;
    int trials = 0;
    int workers = 0;
    std::string out;
    bool has_seed = false, has_trials = false, has_workers = false;
};

void add_common(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON experiment configuration");
    cmd->add_option("--seed", ov.seed, "master seed override")->each([&](const std::string&) {
        ov.has_seed = true;
    });
    cmd->add_option("--trials", ov.trials, "trial count override")->each([&](const std::string&) {
        ov.has_trials = true;
    });
    cmd->add_option("--workers", ov.workers, "worker thread count")->each([&](const std::string&) {
        ov.has_workers = true;
    });
    cmd->add_option("--out", ov.out, "output path prefix");
}

ExperimentConfig resolve(const Overrides& ov) {
    ExperimentConfig cfg = load_config(ov.config_path);
    if (ov.has_seed) cfg.master_seed = ov.seed;
    if (ov.has_trials) cfg.trials = ov.trials;
    if (ov.has_workers) cfg.workers = ov.workers;
    if (!ov.out.empty()) cfg.out = ov.out;
    return cfg;
}

int do_run(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<psrelay::ResultRow> rows = psrelay::run_experiment(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string csv_path = cfg.out + ".csv";
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    psrelay::write_results_csv(rows, csv);

    const std::string summary_path = cfg.out + "_summary.json";
    std::ofstream summary(summary_path);
    if (!summary) throw std::runtime_error("cannot write " + summary_path);
    summary << psrelay::summarize_results(rows).dump(2) << '\n';

    std::fprintf(stderr, "wrote %zu rows to %s (summary: %s) in %.1f s\n", rows.size(),
                 csv_path.c_str(), summary_path.c_str(), secs);
    return 0;
}

int do_table(const ExperimentConfig& cfg) {
    const double snr_db = cfg.sweep.points().front();
    psrelay::SystemParams params = cfg.system;
    params.P = cfg.system.sigma_D2 * std::pow(10.0, snr_db / 10.0);

    const auto t0 = std::chrono::steady_clock::now();
    const psrelay::MarkovQuantizer q = psrelay::build_markov_quantizer(params, cfg.fading);
    const psrelay::PolicyTable table = psrelay::build_lookup_table(q, params, cfg.solver);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ofstream out(cfg.out);
    if (!out) throw std::runtime_error("cannot write " + cfg.out);
    psrelay::save_policy_table(table, cfg.fading, out);

    std::printf("%ld entries (T=%d, battery states=%ld, channel states=%ld) -> %s\n",
                table.entries(), table.T, table.n_battery, table.n_channel, cfg.out.c_str());
    std::fprintf(stderr, "built in %.1f s, %ld embedded solves\n", secs,
                 table.build_stats.embedded_calls);
    return 0;
}

int do_convergence(const ExperimentConfig& cfg, int instances) {
    const std::vector<psrelay::ConvergenceRow> rows =
        psrelay::convergence_traces(cfg, instances);
    const std::string path = cfg.out + ".csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    psrelay::write_convergence_csv(rows, out);
    std::fprintf(stderr, "wrote %zu iteration rows to %s\n", rows.size(), path.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wireless-powered multi-relay power-splitting simulator"};
    app.require_subcommand(1);

    Overrides run_ov, compare_ov, table_ov, conv_ov;
    int instances = 100;

    CLI::App* run_cmd = app.add_subcommand("run", "Monte Carlo sweep over SNR and strategies");
    add_common(run_cmd, run_ov);
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "run with the full comparator strategy set");
    add_common(compare_cmd, compare_ov);
    CLI::App* table_cmd = app.add_subcommand("table", "build and persist a policy lookup table");
    add_common(table_cmd, table_ov);
    CLI::App* conv_cmd =
        app.add_subcommand("convergence", "emit solver iteration traces on random instances");
    add_common(conv_cmd, conv_ov);
    conv_cmd->add_option("--instances", instances, "number of random embedded instances");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return do_run(resolve(run_ov));
        if (compare_cmd->parsed()) {
            ExperimentConfig cfg = resolve(compare_ov);
            cfg.strategies = psrelay::comparison_strategies();
            return do_run(cfg);
        }
        if (table_cmd->parsed()) {
            ExperimentConfig cfg = resolve(table_ov);
            cfg.validate();
            return do_table(cfg);
        }
        if (conv_cmd->parsed()) return do_convergence(resolve(conv_ov), instances);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
