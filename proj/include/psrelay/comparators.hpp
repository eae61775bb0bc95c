#ifndef PSRELAY_COMPARATORS_HPP
#define PSRELAY_COMPARATORS_HPP

#include "psrelay/planner.hpp"

#include <cstdint>

// Baseline strategies the harvest-use-store design is measured against.

namespace psrelay {

struct ComparatorConfig {
    double tau_step = 0.01;            // time-switching grid resolution in (0,1)
    std::uint64_t selection_seed = 0;  // RNG seed for random relay selection
};

// Classical time-switching slot: a fraction tau harvests the whole received
// power, the rest splits equally into receive/forward phases. Relay power is
// 2 eta1 tau P |h|^2 / (1 - tau), the rate carries a (1 - tau)/2 prefactor,
// and tau is grid-optimized per slot. No battery.
PlanResult run_time_switching(const ChannelTrace& trace, const SystemParams& params,
                              const ComparatorConfig& cfg);

// Harvest-store-use: the backward-induction planner with every forwarded
// joule routed through the battery, so forwarding also pays eta2.
PlanResult run_harvest_store_use(const ChannelTrace& trace, const SystemParams& params,
                                 const SolverSettings& settings);

// Battery-free harvest-use; identical to the greedy planner.
PlanResult run_harvest_use(const ChannelTrace& trace, const SystemParams& params,
                           const SolverSettings& settings);

enum class SelectionMode { Best, Random };

// One relay per slot (best = argmax |h_k g_k|, random = uniform), then the
// full joint optimization on the reduced single-relay system.
PlanResult run_relay_selection(const ChannelTrace& trace, const SystemParams& params,
                               SelectionMode mode, const SolverSettings& settings,
                               std::uint64_t selection_seed = 0);

// Non-adaptive power splitting: lambda_i = 0.5 and no battery activity.
PlanResult run_fixed_ps(const ChannelTrace& trace, const SystemParams& params);

} // namespace psrelay

#endif
