#include "psrelay/embedded_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace psrelay {

namespace {

// Inward nudge applied before evaluating the derivative at an interval end;
// the objective's sqrt factor vanishes at x = sigma_b2 and x = a.
constexpr double kEdgeNudge = 1e-12;

double clamp0(double v) { return v > 0.0 ? v : 0.0; }

// sqrt(gain (a - x)(1 - sigma_b2 / x)), the relay's numerator contribution.
double num_term(double gain, double a, double sigma_b2, double x) {
    return std::sqrt(clamp0(gain * clamp0(a - x) * clamp0(1.0 - sigma_b2 / x)));
}

// gain (a - x) sigma_b2 / x, the relay's denominator contribution.
double den_term(double gain, double a, double sigma_b2, double x) {
    return gain * clamp0(a - x) * sigma_b2 / x;
}

struct OtherRelays {
    double s = 0.0; // summed numerator contributions of the fixed relays
    double d = 0.0; // summed denominator contributions
};

OtherRelays sum_others(int j, const std::vector<double>& x, const EmbeddedContext& ctx) {
    OtherRelays o;
    for (int k = 0; k < ctx.relays(); ++k) {
        if (k == j) continue;
        const size_t u = static_cast<size_t>(k);
        o.s += num_term(ctx.gain[u], ctx.a[u], ctx.sigma_b2, x[u]);
        o.d += den_term(ctx.gain[u], ctx.a[u], ctx.sigma_b2, x[u]);
    }
    return o;
}

double eval_f1(int j, double xj, const OtherRelays& o, const EmbeddedContext& ctx) {
    const size_t u = static_cast<size_t>(j);
    const double s = num_term(ctx.gain[u], ctx.a[u], ctx.sigma_b2, xj) + o.s;
    return s * s;
}

double eval_f2(int j, double xj, const OtherRelays& o, const EmbeddedContext& ctx) {
    const size_t u = static_cast<size_t>(j);
    return den_term(ctx.gain[u], ctx.a[u], ctx.sigma_b2, xj) + o.d + ctx.sigma_D2;
}

} // namespace

void SolverSettings::validate() const {
    if (!(delta1 > 0.0)) throw std::invalid_argument("SolverSettings.delta1: must be > 0");
    if (!(delta2 > 0.0)) throw std::invalid_argument("SolverSettings.delta2: must be > 0");
    if (!(bisect_tol > 0.0)) throw std::invalid_argument("SolverSettings.bisect_tol: must be > 0");
    if (max_dinkelbach_iters < 1)
        throw std::invalid_argument("SolverSettings.max_dinkelbach_iters: must be >= 1");
    if (max_sweeps < 1) throw std::invalid_argument("SolverSettings.max_sweeps: must be >= 1");
}

EmbeddedContext make_embedded_context(const EnergyVariation& v, const SlotChannel& ch,
                                      const SystemParams& params, PowerRouting routing) {
    const int K = ch.relays();
    if (static_cast<int>(v.v.size()) != K)
        throw std::domain_error("variation/channel relay count mismatch");

    const BatteryGrid grid = grid_of(params);
    const bool hsu = routing == PowerRouting::HarvestStoreUse;
    const double eff = hsu ? params.eta1 * params.eta2 : params.eta1;
    const double dis_div = hsu ? params.eta1 * params.eta2 : params.eta1;
    const double chg_div = params.eta1 * params.eta2;

    EmbeddedContext ctx;
    ctx.sigma_b2 = params.sigma_b2;
    ctx.sigma_D2 = params.sigma_D2;
    ctx.a.resize(static_cast<size_t>(K));
    ctx.x_hi.resize(static_cast<size_t>(K));
    ctx.gain.resize(static_cast<size_t>(K));
    ctx.p_h2.resize(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
        const size_t u = static_cast<size_t>(k);
        const double h2 = std::norm(ch.h[u]);
        const double ve = grid.energy(v.v[u]);
        if (!charge_within_cap(ve, h2, params))
            throw std::domain_error("infeasible variation: charge exceeds harvest cap");
        ctx.p_h2[u] = params.P * h2;
        ctx.a[u] = params.P * h2 + std::max(0.0, ve) / dis_div +
                   std::min(0.0, ve) / chg_div + params.sigma_b2;
        ctx.x_hi[u] = lambda_i_upper(ve, h2, params) * params.P * h2 + params.sigma_b2;
        ctx.gain[u] = eff * std::norm(ch.g[u]);
    }
    return ctx;
}

double objective_j(const std::vector<double>& x, const EmbeddedContext& ctx) {
    if (static_cast<int>(x.size()) != ctx.relays())
        throw std::domain_error("objective_j: dimension mismatch");
    double num = 0.0;
    double den = ctx.sigma_D2;
    for (int k = 0; k < ctx.relays(); ++k) {
        const size_t u = static_cast<size_t>(k);
        const double slack = 1e-9 * std::max(1.0, ctx.x_hi[u]);
        if (x[u] < ctx.sigma_b2 - slack || x[u] > ctx.x_hi[u] + slack)
            throw std::domain_error("objective_j: x outside [sigma_b2, x_hi]");
        num += num_term(ctx.gain[u], ctx.a[u], ctx.sigma_b2, x[u]);
        den += den_term(ctx.gain[u], ctx.a[u], ctx.sigma_b2, x[u]);
    }
    return num * num / den;
}

double solve_p4(double q, int j, const std::vector<double>& x,
                const EmbeddedContext& ctx, const SolverSettings& settings) {
    const size_t u = static_cast<size_t>(j);
    const double x_lo = ctx.sigma_b2;
    const double x_hi = ctx.x_hi[u];
    if (x_hi <= x_lo) return x_lo;
    const double c = ctx.gain[u];
    if (c == 0.0) return x_lo; // objective constant in this coordinate

    const OtherRelays o = sum_others(j, x, ctx);
    const double a = ctx.a[u];
    const double sb2 = ctx.sigma_b2;

    // d/dx [F1 - q F2] = c (a sb2 / x^2 - 1)(1 + s / g(x)) + q c sb2 a / x^2,
    // where g(x) is this relay's numerator term; concave, so the sign of the
    // derivative flips at most once on the interval.
    auto deriv = [&](double xx) {
        const double lead = c * (a * sb2 / (xx * xx) - 1.0);
        double ratio = 0.0;
        if (o.s > 0.0) {
            const double g = num_term(c, a, sb2, xx);
            ratio = g > 0.0 ? o.s / g : 1e300; // finite so a zero lead stays zero
        }
        return lead * (1.0 + ratio) + q * c * sb2 * a / (xx * xx);
    };

    const double nudge = kEdgeNudge * (x_hi - x_lo);
    double lo = x_lo + nudge;
    double hi = x_hi - nudge;
    if (deriv(hi) >= 0.0) return x_hi;
    if (deriv(lo) <= 0.0) return x_lo;
    while (hi - lo > settings.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        if (deriv(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

DinkelbachResult dinkelbach(int j, const std::vector<double>& x_fixed,
                            const EmbeddedContext& ctx, const SolverSettings& settings) {
    const OtherRelays o = sum_others(j, x_fixed, ctx);
    std::vector<double> x = x_fixed;
    const size_t u = static_cast<size_t>(j);

    DinkelbachResult r;
    double q = 0.0;
    r.converged = false;
    for (int n = 1; n <= settings.max_dinkelbach_iters; ++n) {
        x[u] = solve_p4(q, j, x, ctx, settings);
        const double f1 = eval_f1(j, x[u], o, ctx);
        const double f2 = eval_f2(j, x[u], o, ctx);
        const double f = f1 - q * f2;
        r.iters = n;
        if (settings.trace) r.trace.emplace_back(q, f);
        r.x = x[u];
        r.q = f1 / f2;
        if (f < settings.delta1) {
            r.converged = true;
            break;
        }
        q = f1 / f2;
    }
    return r;
}

EmbeddedResult solve_embedded(const EnergyVariation& v, const SlotChannel& ch,
                              const SystemParams& params, const SolverSettings& settings,
                              PowerRouting routing) {
    settings.validate();
    const EmbeddedContext ctx = make_embedded_context(v, ch, params, routing);
    const int K = ctx.relays();

    EmbeddedResult res;
    res.x.assign(static_cast<size_t>(K), ctx.sigma_b2);
    res.j = 0.0; // objective at the all-lower-bound start

    for (int sweep = 1; sweep <= settings.max_sweeps; ++sweep) {
        const double j_before = res.j;
        for (int j = 0; j < K; ++j) {
            const size_t u = static_cast<size_t>(j);
            if (ctx.gain[u] == 0.0 || ctx.x_hi[u] <= ctx.sigma_b2) continue;
            const DinkelbachResult dr = dinkelbach(j, res.x, ctx, settings);
            res.stats.dinkelbach_runs += 1;
            res.stats.dinkelbach_iters += dr.iters;
            if (!dr.converged) res.stats.nonconverged_runs += 1;

            // Accept only improvements; dinkelbach's early termination can
            // sit a hair below the incumbent.
            std::vector<double> cand = res.x;
            cand[u] = dr.x;
            const double j_cand = objective_j(cand, ctx);
            if (j_cand > res.j) {
                res.x = std::move(cand);
                res.j = j_cand;
            }
            if (settings.trace) {
                const double f_last = dr.trace.empty() ? 0.0 : dr.trace.back().second;
                res.updates.push_back({sweep, j, dr.q, f_last, res.j});
                res.dinkelbach_traces.push_back(dr);
            }
        }
        res.stats.sweeps = sweep;
        if (res.j - j_before < settings.delta2) break;
    }

    res.lambda_i.assign(static_cast<size_t>(K), 0.0);
    for (int k = 0; k < K; ++k) {
        const size_t u = static_cast<size_t>(k);
        if (ctx.p_h2[u] <= 0.0) continue;
        const double li = (res.x[u] - ctx.sigma_b2) / ctx.p_h2[u];
        const double li_hi = (ctx.x_hi[u] - ctx.sigma_b2) / ctx.p_h2[u];
        res.lambda_i[u] = std::clamp(li, 0.0, li_hi);
    }
    return res;
}

double j_upper(const EmbeddedContext& ctx) {
    double num = 0.0;
    double den = ctx.sigma_D2;
    for (int k = 0; k < ctx.relays(); ++k) {
        const size_t u = static_cast<size_t>(k);
        const double b = ctx.p_h2[u] + ctx.sigma_b2;
        const double surplus = clamp0(ctx.a[u] - ctx.sigma_b2);
        num += std::sqrt(clamp0(ctx.gain[u] * surplus * (1.0 - ctx.sigma_b2 / b)));
        den += ctx.gain[u] * surplus * ctx.sigma_b2 / b;
    }
    return num * num / den;
}

} // namespace psrelay
