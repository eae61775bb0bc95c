#ifndef PSRELAY_MODEL_HPP
#define PSRELAY_MODEL_HPP

#include <complex>
#include <vector>

// Core types and single-slot physics of the wireless-powered relay network:
// three-way power splitting at each relay, quantized battery charge/discharge,
// amplify-and-forward beamforming SNR, and the per-slot throughput payoff.
//
// Slot length is normalized, so power and energy are numerically identical.
// Battery levels are stored as integers 0..L; conversion to joules happens at
// the boundary via BatteryGrid.

namespace psrelay {

using cdouble = std::complex<double>;

struct SystemParams {
    double P = 10.0;       // source transmit power (W)
    int K = 2;             // number of relays
    int T = 10;            // number of time slots
    int L = 4;             // battery levels minus one
    double alpha = 1.0;    // battery size coefficient, b_max = alpha * P
    double eta1 = 0.4;     // RF-to-DC conversion efficiency
    double eta2 = 0.8;     // battery storage efficiency
    double sigma_b2 = 1.0; // RF-to-baseband conversion noise variance (W)
    double sigma_D2 = 1.0; // destination noise variance (W)
    double sigma_a2 = 0.0; // antenna noise variance; negligible, kept at 0
    int m = 3;             // Markov states per link
    double log_base = 2.0; // throughput logarithm base

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

// Discrete battery: L+1 levels {0, step, ..., b_max} with step = b_max / L.
// All level arithmetic is integer; energy(i) = i * step is the only
// level-to-joules conversion used anywhere.
struct BatteryGrid {
    double b_max = 0.0;
    int L = 1;

    double step() const { return b_max / L; }
    double energy(int level) const { return level * step(); }
};

BatteryGrid grid_of(const SystemParams& params);

// Energy levels at all K relays at the beginning of a slot.
struct BatteryState {
    std::vector<int> levels;

    bool operator==(const BatteryState&) const = default;
};

BatteryState zero_state(int K);

// Net per-slot battery change in grid-step units, one entry per relay.
// Positive = discharge, negative = charge: v = B(t) - B(t+1).
struct EnergyVariation {
    std::vector<int> v;

    bool operator==(const EnergyVariation&) const = default;
};

// Per-relay power-splitting ratios; lambda_i + lambda_f + lambda_b = 1.
struct SplitRatios {
    std::vector<double> lambda_i;
    std::vector<double> lambda_f;
    std::vector<double> lambda_b;
};

// A per-slot control: battery variation plus information-split ratios.
struct Decision {
    EnergyVariation variation;
    std::vector<double> lambda_i;
};

// Complex link gains for one slot: h = source->relay, g = relay->destination.
struct SlotChannel {
    std::vector<cdouble> h;
    std::vector<cdouble> g;

    int relays() const { return static_cast<int>(h.size()); }
};

// Beamforming rotation -(arg h + arg g); applying it makes h*g*e^{i theta}
// real and nonnegative. Zero gain on either link returns 0.
double beamforming_phase(cdouble h, cdouble g);

// Charged levels for one slot given the gross DC power routed to the battery:
// min{headroom, floor(eta2 * gross / step)}.
int charge_quantize(int headroom_levels, double gross_stored_power,
                    const BatteryGrid& grid, double eta2);

struct SplitResult {
    double b_discharge; // battery power backing transmission (W)
    double lambda_b;    // split ratio charging the battery
};

// Recovers the discharge power and charging split ratio from a variation
// value (in energy units). Charging and discharging never share a slot:
// b = max{0, v}, lambda_b = -min{0, v / (eta1 eta2 P |h|^2)}.
// Throws std::domain_error if the requested charge exceeds harvestable power.
SplitResult split_from_variation(double v, cdouble h, const SystemParams& params);

// True iff a charge of -v energy units fits under the harvest cap
// eta1 * eta2 * P * |h|^2. Discharge (v >= 0) is always within the cap.
bool charge_within_cap(double v, double h2, const SystemParams& params);

// Upper end of the feasible lambda_i interval for a given variation:
// 1 + min{0, v / (eta1 eta2 P |h|^2)}. Requires charge_within_cap.
double lambda_i_upper(double v, double h2, const SystemParams& params);

// Materializes the full three-way split of a decision: lambda_b follows from
// the variation, lambda_f absorbs the remainder so each relay sums to 1.
SplitRatios split_ratios(const Decision& d, const SlotChannel& ch,
                         const SystemParams& params);

// Relay transmit power eta1 (1 - lambda_i) P |h|^2 + min{0, v/eta2} + max{0, v}.
double relay_transmit_power(double lambda_i, double v, cdouble h,
                            const SystemParams& params);

// Amplification gain beta = sqrt(p_r / (lambda_i (P|h|^2 + sigma_a2) + sigma_b2)).
double amplification_gain(double lambda_i, double p_r, cdouble h,
                          const SystemParams& params);

// Destination SNR of one slot under a feasible decision:
//   P (sum_k beta_k |h_k g_k| sqrt(lambda_{k,i}))^2
//   / (sum_k beta_k^2 |g_k|^2 sigma_b2 + sigma_D2).
// Throws std::domain_error on an infeasible decision.
double slot_snr(const SlotChannel& ch, const Decision& d, const SystemParams& params);

// Per-slot throughput 0.5 * log(1 + snr); the 1/2 reflects half-duplex relaying.
double payoff_from_snr(double snr, const SystemParams& params);
double payoff(const SlotChannel& ch, const Decision& d, const SystemParams& params);

// Battery evolution B(t+1) = B(t) - v(t), componentwise in level units.
// Throws std::out_of_range if any component leaves {0..L}.
BatteryState battery_step(const BatteryState& state, const EnergyVariation& v,
                          const SystemParams& params);

// Checks C2 (grid-valued), C3 (state bounds), and the C1 harvest cap.
bool decision_feasible(const BatteryState& state, const EnergyVariation& v,
                       const SlotChannel& ch, const SystemParams& params);

} // namespace psrelay

#endif
