#include "psrelay/comparators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace psrelay {

namespace {

double time_switching_rate(const SlotChannel& ch, const SystemParams& params, double tau) {
    double num = 0.0;
    double den = params.sigma_D2;
    for (int k = 0; k < ch.relays(); ++k) {
        const size_t u = static_cast<size_t>(k);
        const double h2 = std::norm(ch.h[u]);
        const double p_r = 2.0 * params.eta1 * tau * params.P * h2 / (1.0 - tau);
        const double rx = params.P * h2 + params.sigma_b2; // full-signal reception
        const double beta = std::sqrt(p_r / rx);
        num += beta * std::abs(ch.h[u] * ch.g[u]);
        den += beta * beta * std::norm(ch.g[u]) * params.sigma_b2;
    }
    const double snr = params.P * num * num / den;
    return (1.0 - tau) * payoff_from_snr(snr, params);
}

} // namespace

PlanResult run_time_switching(const ChannelTrace& trace, const SystemParams& params,
                              const ComparatorConfig& cfg) {
    if (!(cfg.tau_step > 0.0 && cfg.tau_step < 1.0))
        throw std::invalid_argument("ComparatorConfig.tau_step: must be in (0, 1)");

    PlanResult r;
    r.trajectory.push_back(zero_state(params.K));
    const EnergyVariation zero{std::vector<int>(static_cast<size_t>(params.K), 0)};
    for (int t = 0; t < params.T; ++t) {
        const SlotChannel ch = trace.slot(t);
        double best = 0.0;
        for (double tau = cfg.tau_step; tau < 1.0; tau += cfg.tau_step)
            best = std::max(best, time_switching_rate(ch, params, tau));
        r.decisions.push_back(Decision{zero, std::vector<double>(static_cast<size_t>(params.K), 1.0)});
        r.per_slot_payoff.push_back(best);
        r.trajectory.push_back(r.trajectory.back());
        r.r_total += best;
    }
    return r;
}

PlanResult run_harvest_store_use(const ChannelTrace& trace, const SystemParams& params,
                                 const SolverSettings& settings) {
    return backward_induction(trace, params, settings, PowerRouting::HarvestStoreUse);
}

PlanResult run_harvest_use(const ChannelTrace& trace, const SystemParams& params,
                           const SolverSettings& settings) {
    return run_greedy(trace, params, settings);
}

PlanResult run_relay_selection(const ChannelTrace& trace, const SystemParams& params,
                               SelectionMode mode, const SolverSettings& settings,
                               std::uint64_t selection_seed) {
    if (params.K < 1) throw std::invalid_argument("run_relay_selection: K must be >= 1");

    std::mt19937_64 eng(selection_seed);
    ChannelTrace reduced;
    reduced.T = trace.T;
    reduced.K = 1;
    reduced.seed = trace.seed;
    reduced.h.resize(static_cast<size_t>(trace.T));
    reduced.g.resize(static_cast<size_t>(trace.T));
    for (int t = 0; t < trace.T; ++t) {
        int pick = 0;
        if (mode == SelectionMode::Best) {
            double best = -1.0;
            for (int k = 0; k < trace.K; ++k) {
                const double metric = std::abs(trace.hk(t, k) * trace.gk(t, k));
                if (metric > best) {
                    best = metric;
                    pick = k;
                }
            }
        } else {
            const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
            pick = static_cast<int>(u * trace.K);
        }
        reduced.h[static_cast<size_t>(t)] = trace.hk(t, pick);
        reduced.g[static_cast<size_t>(t)] = trace.gk(t, pick);
    }

    SystemParams single = params;
    single.K = 1;
    return backward_induction(reduced, single, settings);
}

PlanResult run_fixed_ps(const ChannelTrace& trace, const SystemParams& params) {
    PlanResult r;
    r.trajectory.push_back(zero_state(params.K));
    const EnergyVariation zero{std::vector<int>(static_cast<size_t>(params.K), 0)};
    const std::vector<double> half(static_cast<size_t>(params.K), 0.5);
    for (int t = 0; t < params.T; ++t) {
        const Decision d{zero, half};
        const double p = payoff(trace.slot(t), d, params);
        r.decisions.push_back(d);
        r.per_slot_payoff.push_back(p);
        r.trajectory.push_back(r.trajectory.back());
        r.r_total += p;
    }
    return r;
}

} // namespace psrelay
