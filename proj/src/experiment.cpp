#include "psrelay/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace psrelay {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Reads j[key] into out with a field-naming diagnostic on type mismatch.
template <typename T>
void read_field(const json& j, const char* scope, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument(std::string("config field ") + scope + "." + key +
                                    ": wrong type");
    }
}

SystemParams params_at_snr(const ExperimentConfig& cfg, double snr_db) {
    SystemParams p = cfg.system;
    p.P = cfg.system.sigma_D2 * std::pow(10.0, snr_db / 10.0);
    return p;
}

} // namespace

std::vector<double> SnrSweep::points() const {
    std::vector<double> out;
    for (double p = start_db; p <= stop_db + 1e-9; p += step_db) out.push_back(p);
    return out;
}

const std::vector<std::string>& known_strategies() {
    static const std::vector<std::string> tags = {
        "optimal",       "exhaustive",        "markov",     "greedy",
        "harvest_use",   "harvest_store_use", "time_switching",
        "best_relay",    "random_relay",      "fixed_ps"};
    return tags;
}

const std::vector<std::string>& comparison_strategies() {
    static const std::vector<std::string> tags = {
        "optimal",        "markov",      "greedy",       "time_switching",
        "harvest_store_use", "harvest_use", "best_relay", "random_relay"};
    return tags;
}

void ExperimentConfig::validate() const {
    system.validate();
    fading.validate();
    solver.validate();
    if (strategies.empty()) throw std::invalid_argument("config field strategies: empty");
    for (const std::string& s : strategies) {
        const auto& known = known_strategies();
        if (std::find(known.begin(), known.end(), s) == known.end())
            throw std::invalid_argument("config field strategies: unknown tag '" + s + "'");
    }
    if (!(sweep.step_db > 0.0))
        throw std::invalid_argument("config field snr_db.step: must be > 0");
    if (sweep.points().empty())
        throw std::invalid_argument("config field snr_db: empty sweep (stop < start)");
    if (trials < 1) throw std::invalid_argument("config field trials: must be >= 1");
    if (workers < 1) throw std::invalid_argument("config field workers: must be >= 1");
    if (out.empty()) throw std::invalid_argument("config field out: empty path");
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    if (j.contains("system")) {
        const json& s = j.at("system");
        read_field(s, "system", "K", cfg.system.K);
        read_field(s, "system", "T", cfg.system.T);
        read_field(s, "system", "L", cfg.system.L);
        read_field(s, "system", "alpha", cfg.system.alpha);
        read_field(s, "system", "eta1", cfg.system.eta1);
        read_field(s, "system", "eta2", cfg.system.eta2);
        read_field(s, "system", "sigma_b2", cfg.system.sigma_b2);
        read_field(s, "system", "sigma_D2", cfg.system.sigma_D2);
        read_field(s, "system", "m", cfg.system.m);
        read_field(s, "system", "log_base", cfg.system.log_base);
    }
    if (j.contains("fading")) {
        const json& f = j.at("fading");
        read_field(f, "fading", "d_sr", cfg.fading.d_sr);
        read_field(f, "fading", "d_rd", cfg.fading.d_rd);
        read_field(f, "fading", "path_loss_exp", cfg.fading.path_loss_exp);
    }
    read_field(j, "", "strategies", cfg.strategies);
    if (j.contains("snr_db")) {
        const json& s = j.at("snr_db");
        read_field(s, "snr_db", "start", cfg.sweep.start_db);
        read_field(s, "snr_db", "step", cfg.sweep.step_db);
        read_field(s, "snr_db", "stop", cfg.sweep.stop_db);
    }
    read_field(j, "", "trials", cfg.trials);
    read_field(j, "", "master_seed", cfg.master_seed);
    read_field(j, "", "workers", cfg.workers);
    read_field(j, "", "out", cfg.out);
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        read_field(s, "solver", "delta1", cfg.solver.delta1);
        read_field(s, "solver", "delta2", cfg.solver.delta2);
        read_field(s, "solver", "bisect_tol", cfg.solver.bisect_tol);
        read_field(s, "solver", "max_dinkelbach_iters", cfg.solver.max_dinkelbach_iters);
        read_field(s, "solver", "max_sweeps", cfg.solver.max_sweeps);
    }
    if (j.contains("comparator")) {
        const json& c = j.at("comparator");
        read_field(c, "comparator", "tau_step", cfg.comparator.tau_step);
    }
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["system"] = {{"K", cfg.system.K},       {"T", cfg.system.T},
                   {"L", cfg.system.L},       {"alpha", cfg.system.alpha},
                   {"eta1", cfg.system.eta1}, {"eta2", cfg.system.eta2},
                   {"sigma_b2", cfg.system.sigma_b2},
                   {"sigma_D2", cfg.system.sigma_D2},
                   {"m", cfg.system.m},       {"log_base", cfg.system.log_base}};
    j["fading"] = {{"d_sr", cfg.fading.d_sr},
                   {"d_rd", cfg.fading.d_rd},
                   {"path_loss_exp", cfg.fading.path_loss_exp}};
    j["strategies"] = cfg.strategies;
    j["snr_db"] = {{"start", cfg.sweep.start_db},
                   {"step", cfg.sweep.step_db},
                   {"stop", cfg.sweep.stop_db}};
    j["trials"] = cfg.trials;
    j["master_seed"] = cfg.master_seed;
    j["workers"] = cfg.workers;
    j["out"] = cfg.out;
    j["solver"] = {{"delta1", cfg.solver.delta1},
                   {"delta2", cfg.solver.delta2},
                   {"bisect_tol", cfg.solver.bisect_tol},
                   {"max_dinkelbach_iters", cfg.solver.max_dinkelbach_iters},
                   {"max_sweeps", cfg.solver.max_sweeps}};
    j["comparator"] = {{"tau_step", cfg.comparator.tau_step}};
    return j;
}

std::uint64_t derive_trial_seed(std::uint64_t master, int snr_index, int trial) {
    std::uint64_t x = splitmix64(master);
    x = splitmix64(x ^ (static_cast<std::uint64_t>(snr_index) + 1));
    x = splitmix64(x ^ ((static_cast<std::uint64_t>(trial) + 1) << 20));
    return x;
}

PlanResult run_strategy(const std::string& tag, const ChannelTrace& trace,
                        const SystemParams& params, const ExperimentConfig& cfg,
                        const PolicyTable* table, std::uint64_t trial_seed) {
    if (tag == "optimal") return backward_induction(trace, params, cfg.solver);
    if (tag == "exhaustive") return exhaustive_search(trace, params, cfg.solver);
    if (tag == "markov") {
        if (table == nullptr)
            throw std::invalid_argument("run_strategy: markov requires a policy table");
        return run_online_markov(trace, *table, params, cfg.solver);
    }
    if (tag == "greedy") return run_greedy(trace, params, cfg.solver);
    if (tag == "harvest_use") return run_harvest_use(trace, params, cfg.solver);
    if (tag == "harvest_store_use") return run_harvest_store_use(trace, params, cfg.solver);
    if (tag == "time_switching") return run_time_switching(trace, params, cfg.comparator);
    if (tag == "best_relay")
        return run_relay_selection(trace, params, SelectionMode::Best, cfg.solver);
    if (tag == "random_relay")
        return run_relay_selection(trace, params, SelectionMode::Random, cfg.solver,
                                   splitmix64(trial_seed ^ 0x5E1EC7EDULL));
    if (tag == "fixed_ps") return run_fixed_ps(trace, params);
    throw std::invalid_argument("run_strategy: unknown tag '" + tag + "'");
}

void parallel_for_indexed(long n, int workers, const std::function<void(long)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    auto worker = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int count = static_cast<int>(std::min<long>(workers, n));
    pool.reserve(static_cast<size_t>(count));
    for (int w = 0; w < count; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<double> points = cfg.sweep.points();
    const long n_points = static_cast<long>(points.size());

    const bool needs_markov =
        std::find(cfg.strategies.begin(), cfg.strategies.end(), "markov") != cfg.strategies.end();
    std::vector<std::unique_ptr<PolicyTable>> tables(static_cast<size_t>(n_points));
    if (needs_markov) {
        for (long i = 0; i < n_points; ++i) {
            const SystemParams p = params_at_snr(cfg, points[static_cast<size_t>(i)]);
            const MarkovQuantizer q = build_markov_quantizer(p, cfg.fading);
            tables[static_cast<size_t>(i)] =
                std::make_unique<PolicyTable>(build_lookup_table(q, p, cfg.solver));
        }
    }

    const long n_tasks = n_points * cfg.trials;
    std::vector<std::vector<ResultRow>> per_task(static_cast<size_t>(n_tasks));
    parallel_for_indexed(n_tasks, cfg.workers, [&](long task) {
        const int snr_index = static_cast<int>(task / cfg.trials);
        const int trial = static_cast<int>(task % cfg.trials);
        const double snr_db = points[static_cast<size_t>(snr_index)];
        const SystemParams params = params_at_snr(cfg, snr_db);
        const std::uint64_t seed = derive_trial_seed(cfg.master_seed, snr_index, trial);
        const ChannelTrace trace = sample_trace(params, cfg.fading, seed);
        for (const std::string& tag : cfg.strategies) {
            const PlanResult pr = run_strategy(tag, trace, params, cfg,
                                               tables[static_cast<size_t>(snr_index)].get(), seed);
            ResultRow row;
            row.strategy = tag;
            row.snr_db = snr_db;
            row.trial = trial;
            row.seed = seed;
            row.r_total = pr.r_total;
            row.per_slot = pr.per_slot_payoff;
            row.embedded_calls = pr.stats.embedded_calls;
            row.dinkelbach_iters = pr.stats.dinkelbach_iters;
            per_task[static_cast<size_t>(task)].push_back(std::move(row));
        }
    });

    // (strategy in config order, snr, trial)
    std::vector<ResultRow> rows;
    rows.reserve(static_cast<size_t>(n_tasks) * cfg.strategies.size());
    for (size_t s = 0; s < cfg.strategies.size(); ++s)
        for (long task = 0; task < n_tasks; ++task)
            rows.push_back(per_task[static_cast<size_t>(task)][s]);
    return rows;
}

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
    os << "strategy,snr_db,trial,seed,r_total,per_slot_payoffs,embedded_calls,dinkelbach_iters\n";
    for (const ResultRow& r : rows) {
        os << r.strategy << ',' << fmt17(r.snr_db) << ',' << r.trial << ',' << r.seed << ','
           << fmt17(r.r_total) << ",\"";
        for (size_t i = 0; i < r.per_slot.size(); ++i) {
            if (i) os << ';';
            os << fmt17(r.per_slot[i]);
        }
        os << "\"," << r.embedded_calls << ',' << r.dinkelbach_iters << '\n';
    }
}

json summarize_results(const std::vector<ResultRow>& rows) {
    json cells = json::array();
    // Cells appear in first-encounter order, which is the deterministic row order.
    std::vector<std::pair<std::string, double>> seen;
    for (const ResultRow& row : rows) {
        const std::pair<std::string, double> key{row.strategy, row.snr_db};
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
        seen.push_back(key);
        double sum = 0.0;
        long n = 0;
        for (const ResultRow& r : rows)
            if (r.strategy == key.first && r.snr_db == key.second) {
                sum += r.r_total;
                ++n;
            }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const ResultRow& r : rows)
            if (r.strategy == key.first && r.snr_db == key.second)
                ss += (r.r_total - mean) * (r.r_total - mean);
        const double stddev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        cells.push_back({{"strategy", key.first},
                         {"snr_db", key.second},
                         {"trials", n},
                         {"mean", mean},
                         {"std", stddev}});
    }
    return json{{"schema", "psrelay-summary-v1"}, {"cells", cells}};
}

std::uint64_t params_hash(const SystemParams& s, const FadingParams& f) {
    std::string canon;
    canon += "K=" + std::to_string(s.K) + ";T=" + std::to_string(s.T) +
             ";L=" + std::to_string(s.L) + ";m=" + std::to_string(s.m);
    canon += ";P=" + fmt17(s.P) + ";alpha=" + fmt17(s.alpha) + ";eta1=" + fmt17(s.eta1) +
             ";eta2=" + fmt17(s.eta2) + ";sigma_b2=" + fmt17(s.sigma_b2) +
             ";sigma_D2=" + fmt17(s.sigma_D2) + ";log_base=" + fmt17(s.log_base);
    canon += ";d_sr=" + fmt17(f.d_sr) + ";d_rd=" + fmt17(f.d_rd) +
             ";ploss=" + fmt17(f.path_loss_exp);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void save_policy_table(const PolicyTable& table, const FadingParams& fading,
                       std::ostream& os) {
    json j;
    j["schema"] = "psrelay-policy-table-v1";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(params_hash(table.params, fading)));
    j["params_hash"] = buf;
    j["T"] = table.T;
    j["n_battery"] = table.n_battery;
    j["n_channel"] = table.n_channel;
    j["K"] = table.params.K;
    j["v_star"] = table.v_star;
    j["u_star"] = table.u_star;
    os << j.dump() << '\n';
}

PolicyTable load_policy_table(std::istream& is, const SystemParams& system,
                              const FadingParams& fading) {
    json j;
    is >> j;
    if (!j.contains("schema") || j.at("schema") != "psrelay-policy-table-v1")
        throw std::runtime_error("policy table: unknown schema");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(params_hash(system, fading)));
    if (j.at("params_hash").get<std::string>() != buf)
        throw std::runtime_error("policy table: params hash mismatch, refusing to load");

    PolicyTable table;
    table.params = system;
    table.quantizer = build_markov_quantizer(system, fading);
    table.T = j.at("T").get<int>();
    table.n_battery = j.at("n_battery").get<long>();
    table.n_channel = j.at("n_channel").get<long>();
    table.v_star = j.at("v_star").get<std::vector<int>>();
    table.u_star = j.at("u_star").get<std::vector<double>>();
    if (table.T != system.T || table.n_battery != num_battery_states(system) ||
        table.n_channel != num_channel_states(system.m, system.K) ||
        static_cast<long>(table.v_star.size()) != table.entries() * system.K ||
        static_cast<long>(table.u_star.size()) != table.entries())
        throw std::runtime_error("policy table: dimensions inconsistent with parameters");
    return table;
}

std::vector<ConvergenceRow> convergence_traces(const ExperimentConfig& cfg, int instances) {
    cfg.validate();
    const double snr_db = cfg.sweep.points().front();
    const SystemParams params = params_at_snr(cfg, snr_db);
    SolverSettings settings = cfg.solver;
    settings.trace = true;

    SystemParams one_slot = params;
    one_slot.T = 1;

    std::vector<ConvergenceRow> rows;
    for (int i = 0; i < instances; ++i) {
        const std::uint64_t seed = derive_trial_seed(cfg.master_seed, 0, i);
        const ChannelTrace trace = sample_trace(one_slot, cfg.fading, seed);
        const SlotChannel ch = trace.slot(0);

        // Random battery state and feasible variation from a side stream.
        std::mt19937_64 eng(splitmix64(seed ^ 0xC0FFEEULL));
        BatteryState state;
        state.levels.resize(static_cast<size_t>(params.K));
        for (int k = 0; k < params.K; ++k)
            state.levels[static_cast<size_t>(k)] = static_cast<int>(eng() % (params.L + 1));
        const std::vector<EnergyVariation> feas = feasible_variations(state, ch, params);
        const EnergyVariation v = feas[eng() % feas.size()];

        const EmbeddedResult er = solve_embedded(v, ch, params, settings);
        for (size_t u = 0; u < er.updates.size(); ++u) {
            const EmbeddedUpdate& up = er.updates[u];
            const DinkelbachResult& dr = er.dinkelbach_traces[u];
            for (size_t it = 0; it < dr.trace.size(); ++it) {
                rows.push_back({i, up.sweep, up.relay, static_cast<int>(it) + 1,
                                dr.trace[it].first, dr.trace[it].second, up.j});
            }
        }
    }
    return rows;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os) {
    os << "instance,sweep,relay,iter,q,f,j\n";
    for (const ConvergenceRow& r : rows) {
        os << r.instance << ',' << r.sweep << ',' << r.relay << ',' << r.iter << ','
           << fmt17(r.q) << ',' << fmt17(r.f) << ',' << fmt17(r.j) << '\n';
    }
}

} // namespace psrelay
