#ifndef PSRELAY_EMBEDDED_SOLVER_HPP
#define PSRELAY_EMBEDDED_SOLVER_HPP

#include "psrelay/model.hpp"

#include <vector>

// Per-slot SNR maximization over the information-split ratios with the
// battery variation fixed. The fractional objective is handled by cyclic
// coordinate ascent over relays, each coordinate solved with a Dinkelbach
// transform whose subtractive subproblem is concave and maximized by
// bisection on the derivative sign.
//
// The substituted variable is x_k = lambda_{k,i} P |h_k|^2 + sigma_b2, and
//
//        (sum_k sqrt(gain_k (a_k - x_k) (1 - sigma_b2 / x_k)))^2
//   J = ------------------------------------------------------------
//        sum_k gain_k (a_k - x_k) sigma_b2 / x_k  +  sigma_D2
//
// with gain_k = eta |g_k|^2 and a_k chosen so that the relay transmit power
// equals eta (a_k - x_k).

namespace psrelay {

// How harvested power reaches the transmit chain. HarvestUseStore forwards
// immediately-used power directly; HarvestStoreUse routes every joule through
// the battery, so forwarding pays the storage efficiency eta2 as well.
enum class PowerRouting { HarvestUseStore, HarvestStoreUse };

struct SolverSettings {
    double delta1 = 1e-8;      // Dinkelbach termination threshold
    double delta2 = 1e-8;      // alternating-sweep termination threshold
    double bisect_tol = 1e-10; // bisection accuracy on x
    int max_dinkelbach_iters = 50;
    int max_sweeps = 50;
    bool trace = false; // record per-update and per-iteration traces

    void validate() const;
};

struct EmbeddedContext {
    std::vector<double> a;    // per-relay affine constant (W)
    std::vector<double> x_hi; // upper bound of x_k; lower bound is sigma_b2
    std::vector<double> gain; // eta * |g_k|^2
    std::vector<double> p_h2; // P * |h_k|^2, for recovering lambda_i
    double sigma_b2 = 1.0;
    double sigma_D2 = 1.0;

    int relays() const { return static_cast<int>(a.size()); }
};

// Builds the context for a variation (in grid levels) under a slot channel.
// Throws std::domain_error when some relay's charge exceeds the harvest cap.
EmbeddedContext make_embedded_context(const EnergyVariation& v, const SlotChannel& ch,
                                      const SystemParams& params,
                                      PowerRouting routing = PowerRouting::HarvestUseStore);

// J evaluated at a full x vector. Throws std::domain_error out of bounds.
double objective_j(const std::vector<double>& x, const EmbeddedContext& ctx);

// Maximizer of F1(x_j) - q F2(x_j) over [sigma_b2, x_hi_j] with the other
// coordinates fixed. Ties and zero-gain relays resolve to the lower bound.
double solve_p4(double q, int j, const std::vector<double>& x,
                const EmbeddedContext& ctx, const SolverSettings& settings);

struct DinkelbachResult {
    double x = 0.0;
    double q = 0.0; // F1(x)/F2(x) at the returned point
    int iters = 0;
    bool converged = true;
    // (q_n, F(q_n)) per iteration when settings.trace is on; q_1 = 0.
    std::vector<std::pair<double, double>> trace;
};

// Algorithm: q_1 = 0; repeat x_n = argmax F1 - q_n F2, stop when
// F1(x_n) - q_n F2(x_n) < delta1, else q_{n+1} = F1(x_n)/F2(x_n).
// The q_n sequence is strictly increasing, F(q_n) decreasing toward 0.
DinkelbachResult dinkelbach(int j, const std::vector<double>& x_fixed,
                            const EmbeddedContext& ctx, const SolverSettings& settings);

struct EmbeddedStats {
    int sweeps = 0;
    long dinkelbach_runs = 0;
    long dinkelbach_iters = 0;
    int nonconverged_runs = 0;
};

// One coordinate update, recorded when tracing: the Dinkelbach terminal
// (q, F(q)) and the objective after the update.
struct EmbeddedUpdate {
    int sweep = 0;
    int relay = 0;
    double q = 0.0;
    double f = 0.0;
    double j = 0.0;
};

struct EmbeddedResult {
    std::vector<double> lambda_i;
    std::vector<double> x;
    double j = 0.0; // optimized SNR
    EmbeddedStats stats;
    std::vector<EmbeddedUpdate> updates;
    std::vector<DinkelbachResult> dinkelbach_traces; // when settings.trace
};

// Full alternating-Dinkelbach solve for one slot and one variation. The
// objective is nondecreasing across coordinate updates by construction
// (an update that fails to improve keeps the previous coordinate value).
EmbeddedResult solve_embedded(const EnergyVariation& v, const SlotChannel& ch,
                              const SystemParams& params, const SolverSettings& settings,
                              PowerRouting routing = PowerRouting::HarvestUseStore);

// Closed-form bound every J iterate stays below: J evaluated with all split
// constraints relaxed (full information split and full forwarding power).
double j_upper(const EmbeddedContext& ctx);

} // namespace psrelay

#endif
