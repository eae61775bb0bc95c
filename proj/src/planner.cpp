#include "psrelay/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psrelay {

namespace {

constexpr double kMaxExhaustiveSequences = 1e7;
constexpr long kMaxTableEntries = 50'000'000;

struct CellChoice {
    double value = 0.0;       // payoff-to-go from this cell
    double slot_payoff = 0.0; // payoff of the chosen slot decision
    EnergyVariation v;
    std::vector<double> lambda_i;
};

EnergyVariation drain_all(const BatteryState& s) {
    return EnergyVariation{s.levels};
}

PlanResult assemble(std::vector<Decision> decisions, std::vector<double> payoffs,
                    const SystemParams& params, SolverTotals stats) {
    PlanResult r;
    r.decisions = std::move(decisions);
    r.per_slot_payoff = std::move(payoffs);
    r.stats = stats;
    r.trajectory.reserve(r.decisions.size() + 1);
    r.trajectory.push_back(zero_state(params.K));
    for (const Decision& d : r.decisions)
        r.trajectory.push_back(battery_step(r.trajectory.back(), d.variation, params));
    r.r_total = 0.0;
    for (double p : r.per_slot_payoff) r.r_total += p;
    return r;
}

} // namespace

void SolverTotals::absorb(const EmbeddedStats& s) {
    embedded_calls += 1;
    dinkelbach_runs += s.dinkelbach_runs;
    dinkelbach_iters += s.dinkelbach_iters;
    sweeps += s.sweeps;
    nonconverged_runs += s.nonconverged_runs;
}

long num_battery_states(const SystemParams& params) {
    long n = 1;
    for (int k = 0; k < params.K; ++k) n *= params.L + 1;
    return n;
}

long battery_index(const BatteryState& state, const SystemParams& params) {
    long index = 0;
    long stride = 1;
    for (int level : state.levels) {
        index += level * stride;
        stride *= params.L + 1;
    }
    return index;
}

BatteryState battery_from_index(long index, const SystemParams& params) {
    BatteryState s;
    s.levels.resize(static_cast<size_t>(params.K));
    for (int k = 0; k < params.K; ++k) {
        s.levels[static_cast<size_t>(k)] = static_cast<int>(index % (params.L + 1));
        index /= params.L + 1;
    }
    return s;
}

std::vector<EnergyVariation> feasible_variations(const BatteryState& state,
                                                 const SlotChannel& ch,
                                                 const SystemParams& params) {
    const BatteryGrid grid = grid_of(params);
    const int K = params.K;

    // Per-relay range [lo_k, S_k]: C3 gives S_k - L, and the C1 harvest cap
    // trims the charge end (feasibility is monotone in v).
    std::vector<int> lo(static_cast<size_t>(K)), hi(static_cast<size_t>(K));
    long count = 1;
    for (int k = 0; k < K; ++k) {
        const size_t u = static_cast<size_t>(k);
        const double h2 = std::norm(ch.h[u]);
        int l = state.levels[u] - params.L;
        while (l < 0 && !charge_within_cap(grid.energy(l), h2, params)) ++l;
        lo[u] = l;
        hi[u] = state.levels[u];
        count *= hi[u] - lo[u] + 1;
    }

    std::vector<EnergyVariation> out;
    out.reserve(static_cast<size_t>(count));
    EnergyVariation v{lo};
    for (;;) {
        out.push_back(v);
        int k = K - 1; // v[0] most significant: odometer rolls from the tail
        while (k >= 0 && v.v[static_cast<size_t>(k)] == hi[static_cast<size_t>(k)]) {
            v.v[static_cast<size_t>(k)] = lo[static_cast<size_t>(k)];
            --k;
        }
        if (k < 0) break;
        ++v.v[static_cast<size_t>(k)];
    }
    return out;
}

PlanResult exhaustive_search(const ChannelTrace& trace, const SystemParams& params,
                             const SolverSettings& settings) {
    if (std::pow(2.0 * params.L + 1.0, static_cast<double>(params.K) * params.T) >
        kMaxExhaustiveSequences)
        throw std::runtime_error("exhaustive_search: sequence count exceeds the 1e7 guard");

    SolverTotals stats;
    std::vector<Decision> current(static_cast<size_t>(params.T));
    std::vector<double> payoffs(static_cast<size_t>(params.T), 0.0);
    std::vector<Decision> best_decisions;
    std::vector<double> best_payoffs;
    double best_total = -1.0;

    // Depth-first over slots; prefixes violating C3 never appear because the
    // per-state enumeration already respects the bounds.
    auto dfs = [&](auto&& self, int t, const BatteryState& s, double acc) -> void {
        const SlotChannel ch = trace.slot(t);
        for (const EnergyVariation& v : feasible_variations(s, ch, params)) {
            const EmbeddedResult er = solve_embedded(v, ch, params, settings);
            stats.absorb(er.stats);
            const double p = payoff_from_snr(er.j, params);
            current[static_cast<size_t>(t)] = Decision{v, er.lambda_i};
            payoffs[static_cast<size_t>(t)] = p;
            if (t + 1 == params.T) {
                if (acc + p > best_total) {
                    best_total = acc + p;
                    best_decisions = current;
                    best_payoffs = payoffs;
                }
            } else {
                self(self, t + 1, battery_step(s, v, params), acc + p);
            }
        }
    };
    dfs(dfs, 0, zero_state(params.K), 0.0);
    return assemble(std::move(best_decisions), std::move(best_payoffs), params, stats);
}

PlanResult backward_induction(const ChannelTrace& trace, const SystemParams& params,
                              const SolverSettings& settings, PowerRouting routing) {
    const long n_states = num_battery_states(params);
    SolverTotals stats;

    // cells[t][s]: optimal decision and payoff-to-go for battery state s at slot t.
    std::vector<std::vector<CellChoice>> cells(
        static_cast<size_t>(params.T), std::vector<CellChoice>(static_cast<size_t>(n_states)));

    for (int t = params.T - 1; t >= 0; --t) {
        const SlotChannel ch = trace.slot(t);
        for (long s = 0; s < n_states; ++s) {
            const BatteryState state = battery_from_index(s, params);
            CellChoice& cell = cells[static_cast<size_t>(t)][static_cast<size_t>(s)];
            if (t == params.T - 1) {
                // Stored energy is worthless after the horizon: drain it all.
                const EnergyVariation v = drain_all(state);
                const EmbeddedResult er = solve_embedded(v, ch, params, settings, routing);
                stats.absorb(er.stats);
                cell.slot_payoff = payoff_from_snr(er.j, params);
                cell.value = cell.slot_payoff;
                cell.v = v;
                cell.lambda_i = er.lambda_i;
                continue;
            }
            double best = -1.0;
            for (const EnergyVariation& v : feasible_variations(state, ch, params)) {
                const EmbeddedResult er = solve_embedded(v, ch, params, settings, routing);
                stats.absorb(er.stats);
                const double p = payoff_from_snr(er.j, params);
                const long next = battery_index(battery_step(state, v, params), params);
                const double value =
                    p + cells[static_cast<size_t>(t) + 1][static_cast<size_t>(next)].value;
                if (value > best) {
                    best = value;
                    cell.value = value;
                    cell.slot_payoff = p;
                    cell.v = v;
                    cell.lambda_i = er.lambda_i;
                }
            }
        }
    }

    std::vector<Decision> decisions;
    std::vector<double> payoffs;
    BatteryState s = zero_state(params.K);
    for (int t = 0; t < params.T; ++t) {
        const CellChoice& cell =
            cells[static_cast<size_t>(t)][static_cast<size_t>(battery_index(s, params))];
        decisions.push_back(Decision{cell.v, cell.lambda_i});
        payoffs.push_back(cell.slot_payoff);
        s = battery_step(s, cell.v, params);
    }
    return assemble(std::move(decisions), std::move(payoffs), params, stats);
}

size_t PolicyTable::entry_index(int t, long s, long c) const {
    return static_cast<size_t>((static_cast<long>(t) * n_battery + s) * n_channel + c);
}

EnergyVariation PolicyTable::variation_at(int t, long s, long c) const {
    const size_t base = entry_index(t, s, c) * static_cast<size_t>(params.K);
    EnergyVariation v;
    v.v.assign(v_star.begin() + static_cast<long>(base),
               v_star.begin() + static_cast<long>(base) + params.K);
    return v;
}

PolicyTable build_lookup_table(const MarkovQuantizer& quantizer, const SystemParams& params,
                               const SolverSettings& settings) {
    PolicyTable table;
    table.params = params;
    table.quantizer = quantizer;
    table.T = params.T;
    table.n_battery = num_battery_states(params);
    table.n_channel = num_channel_states(params.m, params.K);
    if (table.entries() > kMaxTableEntries)
        throw std::runtime_error("build_lookup_table: " + std::to_string(table.entries()) +
                                 " entries exceed the memory guard");
    table.v_star.assign(static_cast<size_t>(table.entries()) * params.K, 0);
    table.u_star.assign(static_cast<size_t>(table.entries()), 0.0);

    std::vector<SlotChannel> rep(static_cast<size_t>(table.n_channel));
    for (long c = 0; c < table.n_channel; ++c)
        rep[static_cast<size_t>(c)] = representative_channel(quantizer, c);

    const double channel_weight = 1.0 / static_cast<double>(table.n_channel);
    // expected[s]: channel-averaged payoff-to-go of battery state s at t+1.
    std::vector<double> expected(static_cast<size_t>(table.n_battery), 0.0);
    std::vector<double> value_now(static_cast<size_t>(table.n_battery * table.n_channel), 0.0);

    for (int t = params.T - 1; t >= 0; --t) {
        for (long s = 0; s < table.n_battery; ++s) {
            const BatteryState state = battery_from_index(s, params);
            for (long c = 0; c < table.n_channel; ++c) {
                const SlotChannel& ch = rep[static_cast<size_t>(c)];
                double best = -1.0;
                double best_value = 0.0;
                EnergyVariation best_v;
                if (t == params.T - 1) {
                    const EnergyVariation v = drain_all(state);
                    const EmbeddedResult er = solve_embedded(v, ch, params, settings);
                    table.build_stats.absorb(er.stats);
                    best_value = payoff_from_snr(er.j, params);
                    best_v = v;
                } else {
                    for (const EnergyVariation& v : feasible_variations(state, ch, params)) {
                        const EmbeddedResult er = solve_embedded(v, ch, params, settings);
                        table.build_stats.absorb(er.stats);
                        const long next = battery_index(battery_step(state, v, params), params);
                        const double value = payoff_from_snr(er.j, params) +
                                             expected[static_cast<size_t>(next)];
                        if (value > best) {
                            best = value;
                            best_value = value;
                            best_v = v;
                        }
                    }
                }
                const size_t e = table.entry_index(t, s, c);
                table.u_star[e] = best_value;
                for (int k = 0; k < params.K; ++k)
                    table.v_star[e * static_cast<size_t>(params.K) + static_cast<size_t>(k)] =
                        best_v.v[static_cast<size_t>(k)];
                value_now[static_cast<size_t>(s * table.n_channel + c)] = best_value;
            }
        }
        for (long s = 0; s < table.n_battery; ++s) {
            double sum = 0.0;
            for (long c = 0; c < table.n_channel; ++c)
                sum += value_now[static_cast<size_t>(s * table.n_channel + c)];
            expected[static_cast<size_t>(s)] = channel_weight * sum;
        }
    }
    return table;
}

PlanResult run_online_markov(const ChannelTrace& trace, const PolicyTable& table,
                             const SystemParams& params, const SolverSettings& settings) {
    if (!(table.params.P == params.P && table.params.K == params.K &&
          table.params.T == params.T && table.params.L == params.L &&
          table.params.alpha == params.alpha && table.params.eta1 == params.eta1 &&
          table.params.eta2 == params.eta2 && table.params.sigma_b2 == params.sigma_b2 &&
          table.params.sigma_D2 == params.sigma_D2 && table.params.m == params.m))
        throw std::invalid_argument("run_online_markov: table built for different parameters");
    if (trace.K != params.K || trace.T != params.T)
        throw std::invalid_argument("run_online_markov: trace dimensions mismatch");

    const BatteryGrid grid = grid_of(params);
    SolverTotals stats;
    std::vector<Decision> decisions;
    std::vector<double> payoffs;
    BatteryState s = zero_state(params.K);
    for (int t = 0; t < params.T; ++t) {
        const SlotChannel ch = trace.slot(t);
        const long c = quantize_slot(ch, table.quantizer);
        EnergyVariation v = table.variation_at(t, battery_index(s, params), c);
        // The stored charge was feasible for the representative gains; the
        // true harvest may not cover it, so shrink toward zero until it does.
        for (int k = 0; k < params.K; ++k) {
            const size_t u = static_cast<size_t>(k);
            const double h2 = std::norm(ch.h[u]);
            while (v.v[u] < 0 && !charge_within_cap(grid.energy(v.v[u]), h2, params)) ++v.v[u];
        }
        const EmbeddedResult er = solve_embedded(v, ch, params, settings);
        stats.absorb(er.stats);
        decisions.push_back(Decision{v, er.lambda_i});
        payoffs.push_back(payoff_from_snr(er.j, params));
        s = battery_step(s, v, params);
    }
    return assemble(std::move(decisions), std::move(payoffs), params, stats);
}

PlanResult run_greedy(const ChannelTrace& trace, const SystemParams& params,
                      const SolverSettings& settings) {
    SolverTotals stats;
    std::vector<Decision> decisions;
    std::vector<double> payoffs;
    const EnergyVariation zero{std::vector<int>(static_cast<size_t>(params.K), 0)};
    for (int t = 0; t < params.T; ++t) {
        const SlotChannel ch = trace.slot(t);
        const EmbeddedResult er = solve_embedded(zero, ch, params, settings);
        stats.absorb(er.stats);
        decisions.push_back(Decision{zero, er.lambda_i});
        payoffs.push_back(payoff_from_snr(er.j, params));
    }
    return assemble(std::move(decisions), std::move(payoffs), params, stats);
}

} // namespace psrelay
