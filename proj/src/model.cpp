#include "psrelay/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace psrelay {

namespace {

[[noreturn]] void bad_param(const std::string& field, const std::string& why) {
    throw std::invalid_argument("SystemParams." + field + ": " + why);
}

} // namespace

void SystemParams::validate() const {
    if (!(P > 0.0)) bad_param("P", "must be > 0");
    if (K < 1) bad_param("K", "must be >= 1");
    if (T < 1) bad_param("T", "must be >= 1");
    if (L < 1) bad_param("L", "must be >= 1");
    if (!(alpha > 0.0)) bad_param("alpha", "must be > 0");
    if (!(eta1 > 0.0 && eta1 <= 1.0)) bad_param("eta1", "must be in (0, 1]");
    if (!(eta2 > 0.0 && eta2 <= 1.0)) bad_param("eta2", "must be in (0, 1]");
    if (!(sigma_b2 > 0.0)) bad_param("sigma_b2", "must be > 0");
    if (!(sigma_D2 > 0.0)) bad_param("sigma_D2", "must be > 0");
    if (sigma_a2 != 0.0) bad_param("sigma_a2", "must be 0");
    if (m < 1) bad_param("m", "must be >= 1");
    if (!(log_base > 1.0)) bad_param("log_base", "must be > 1");
}

BatteryGrid grid_of(const SystemParams& params) {
    return BatteryGrid{params.alpha * params.P, params.L};
}

BatteryState zero_state(int K) {
    return BatteryState{std::vector<int>(static_cast<size_t>(K), 0)};
}

double beamforming_phase(cdouble h, cdouble g) {
    if (h == cdouble{0.0, 0.0} || g == cdouble{0.0, 0.0}) return 0.0;
    return -(std::arg(h) + std::arg(g));
}

int charge_quantize(int headroom_levels, double gross_stored_power,
                    const BatteryGrid& grid, double eta2) {
    const int fit = static_cast<int>(std::floor(eta2 * gross_stored_power / grid.step()));
    return std::min(headroom_levels, fit);
}

bool charge_within_cap(double v, double h2, const SystemParams& params) {
    if (v >= 0.0) return true;
    return -v <= params.eta1 * params.eta2 * params.P * h2;
}

double lambda_i_upper(double v, double h2, const SystemParams& params) {
    if (v >= 0.0) return 1.0;
    return 1.0 + v / (params.eta1 * params.eta2 * params.P * h2);
}

SplitResult split_from_variation(double v, cdouble h, const SystemParams& params) {
    const double h2 = std::norm(h);
    if (!charge_within_cap(v, h2, params))
        throw std::domain_error("infeasible charge: -v exceeds eta1*eta2*P*|h|^2");
    if (v >= 0.0) return {v, 0.0};
    return {0.0, -v / (params.eta1 * params.eta2 * params.P * h2)};
}

SplitRatios split_ratios(const Decision& d, const SlotChannel& ch,
                         const SystemParams& params) {
    const BatteryGrid grid = grid_of(params);
    SplitRatios r;
    for (int k = 0; k < ch.relays(); ++k) {
        const size_t u = static_cast<size_t>(k);
        const SplitResult sp =
            split_from_variation(grid.energy(d.variation.v[u]), ch.h[u], params);
        r.lambda_i.push_back(d.lambda_i[u]);
        r.lambda_b.push_back(sp.lambda_b);
        r.lambda_f.push_back(1.0 - d.lambda_i[u] - sp.lambda_b);
    }
    return r;
}

double relay_transmit_power(double lambda_i, double v, cdouble h,
                            const SystemParams& params) {
    const double h2 = std::norm(h);
    return params.eta1 * (1.0 - lambda_i) * params.P * h2 +
           std::min(0.0, v / params.eta2) + std::max(0.0, v);
}

double amplification_gain(double lambda_i, double p_r, cdouble h,
                          const SystemParams& params) {
    if (p_r <= 0.0) return 0.0;
    const double h2 = std::norm(h);
    const double rx = lambda_i * (params.P * h2 + params.sigma_a2) + params.sigma_b2;
    return std::sqrt(p_r / rx);
}

double slot_snr(const SlotChannel& ch, const Decision& d, const SystemParams& params) {
    const int K = ch.relays();
    if (static_cast<int>(d.variation.v.size()) != K ||
        static_cast<int>(d.lambda_i.size()) != K)
        throw std::domain_error("decision/channel relay count mismatch");

    const BatteryGrid grid = grid_of(params);
    double num = 0.0;
    double den = params.sigma_D2;
    for (int k = 0; k < K; ++k) {
        const double v = grid.energy(d.variation.v[static_cast<size_t>(k)]);
        const double li = d.lambda_i[static_cast<size_t>(k)];
        const SplitResult split = split_from_variation(v, ch.h[static_cast<size_t>(k)], params);
        if (li < 0.0 || li > 1.0 - split.lambda_b + 1e-12)
            throw std::domain_error("lambda_i outside the C1 interval");
        const double p_r = relay_transmit_power(li, v, ch.h[static_cast<size_t>(k)], params);
        if (p_r < 0.0) throw std::domain_error("negative relay power under a feasible decision");
        const double beta = amplification_gain(li, p_r, ch.h[static_cast<size_t>(k)], params);
        const double hg = std::abs(ch.h[static_cast<size_t>(k)] * ch.g[static_cast<size_t>(k)]);
        num += beta * hg * std::sqrt(li);
        den += beta * beta * std::norm(ch.g[static_cast<size_t>(k)]) * params.sigma_b2;
    }
    return params.P * num * num / den;
}

double payoff_from_snr(double snr, const SystemParams& params) {
    if (params.log_base == 2.0) return 0.5 * std::log2(1.0 + snr);
    return 0.5 * std::log(1.0 + snr) / std::log(params.log_base);
}

double payoff(const SlotChannel& ch, const Decision& d, const SystemParams& params) {
    return payoff_from_snr(slot_snr(ch, d, params), params);
}

BatteryState battery_step(const BatteryState& state, const EnergyVariation& v,
                          const SystemParams& params) {
    BatteryState next = state;
    for (size_t k = 0; k < state.levels.size(); ++k) {
        next.levels[k] = state.levels[k] - v.v[k];
        if (next.levels[k] < 0 || next.levels[k] > params.L)
            throw std::out_of_range("battery level leaves {0..L}");
    }
    return next;
}

bool decision_feasible(const BatteryState& state, const EnergyVariation& v,
                       const SlotChannel& ch, const SystemParams& params) {
    const int K = params.K;
    if (static_cast<int>(state.levels.size()) != K ||
        static_cast<int>(v.v.size()) != K || ch.relays() != K)
        return false;
    const BatteryGrid grid = grid_of(params);
    for (int k = 0; k < K; ++k) {
        const int vk = v.v[static_cast<size_t>(k)];
        if (vk < -params.L || vk > params.L) return false;                 // C2
        const int sk = state.levels[static_cast<size_t>(k)];
        if (vk > sk || vk < sk - params.L) return false;                   // C3
        if (!charge_within_cap(grid.energy(vk), std::norm(ch.h[static_cast<size_t>(k)]), params))
            return false;                                                  // C1
    }
    return true;
}

} // namespace psrelay
