#ifndef PSRELAY_PLANNER_HPP
#define PSRELAY_PLANNER_HPP

#include "psrelay/channel.hpp"
#include "psrelay/embedded_solver.hpp"
#include "psrelay/model.hpp"

#include <vector>

// Horizon planners over the battery-variation sequence. All four produce a
// PlanResult from the same per-slot embedded solver:
//   - exhaustive_search: enumerates every feasible variation sequence (oracle)
//   - backward_induction: Bellman recursion with non-causal channel knowledge
//   - build_lookup_table / run_online_markov: expected-value dynamic program
//     over quantized channel states, executed causally
//   - run_greedy: per-slot maximization; with empty initial batteries the
//     optimal greedy variation is identically zero.

namespace psrelay {

struct SolverTotals {
    long embedded_calls = 0;
    long dinkelbach_runs = 0;
    long dinkelbach_iters = 0;
    long sweeps = 0;
    long nonconverged_runs = 0;

    void absorb(const EmbeddedStats& s);
};

struct PlanResult {
    std::vector<Decision> decisions;        // one per slot
    std::vector<BatteryState> trajectory;   // T+1 states, trajectory[0] all zero
    std::vector<double> per_slot_payoff;
    double r_total = 0.0;                   // sum of payoffs in time order
    SolverTotals stats;
};

// Battery-state indexing: level vector <-> integer in [0, (L+1)^K).
long num_battery_states(const SystemParams& params);
long battery_index(const BatteryState& state, const SystemParams& params);
BatteryState battery_from_index(long index, const SystemParams& params);

// All variations satisfying C1-C3 for a state under a channel, in ascending
// lexicographic order (v[0] most significant). Argmax loops use strict
// improvement, so the lexicographically smallest maximizer wins ties.
std::vector<EnergyVariation> feasible_variations(const BatteryState& state,
                                                 const SlotChannel& ch,
                                                 const SystemParams& params);

// Ground-truth oracle: depth-first enumeration of feasible variation
// sequences, solving the embedded problem at every visited prefix node.
// Throws std::runtime_error when (2L+1)^(K*T) exceeds the sequence guard.
PlanResult exhaustive_search(const ChannelTrace& trace, const SystemParams& params,
                             const SolverSettings& settings);

// Finite-horizon dynamic program over battery states; the last slot is
// forced to drain every battery. Matches exhaustive_search on r_total.
PlanResult backward_induction(const ChannelTrace& trace, const SystemParams& params,
                              const SolverSettings& settings,
                              PowerRouting routing = PowerRouting::HarvestUseStore);

// Offline policy: optimized variation per (slot, battery state, quantized
// channel state), built on representative gains with an equal-probability
// expectation over next channel states.
struct PolicyTable {
    SystemParams params;
    MarkovQuantizer quantizer;
    int T = 0;
    long n_battery = 0;
    long n_channel = 0;
    std::vector<int> v_star;      // [entry * K + k], entry = (t*n_battery + s)*n_channel + c
    std::vector<double> u_star;   // expected summation of payoffs per entry
    SolverTotals build_stats;

    long entries() const { return static_cast<long>(T) * n_battery * n_channel; }
    size_t entry_index(int t, long s, long c) const;
    EnergyVariation variation_at(int t, long s, long c) const;
};

PolicyTable build_lookup_table(const MarkovQuantizer& quantizer, const SystemParams& params,
                               const SolverSettings& settings);

// Causal execution: quantize the true gains, look up the variation, clamp any
// charge that the true harvest cannot cover to the deepest feasible charge,
// then re-optimize the information split with the true gains.
PlanResult run_online_markov(const ChannelTrace& trace, const PolicyTable& table,
                             const SystemParams& params, const SolverSettings& settings);

// Per-slot greedy: variation identically zero, batteries never used.
PlanResult run_greedy(const ChannelTrace& trace, const SystemParams& params,
                      const SolverSettings& settings);

} // namespace psrelay

#endif
