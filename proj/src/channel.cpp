#include "psrelay/channel.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace psrelay {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform in [0,1) from the top 53 bits; fixed transform for reproducibility.
class TraceRng {
public:
    explicit TraceRng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double exponential(double mean) {
        return -mean * std::log1p(-uniform01());
    }
    double phase() { return kTwoPi * uniform01(); }

private:
    std::mt19937_64 eng_;
};

cdouble draw_gain(TraceRng& rng, double mean_power) {
    const double power = rng.exponential(mean_power);
    const double phi = rng.phase();
    const double amp = std::sqrt(power);
    return {amp * std::cos(phi), amp * std::sin(phi)};
}

} // namespace

double FadingParams::mean_h2() const { return std::pow(d_sr, -path_loss_exp); }
double FadingParams::mean_g2() const { return std::pow(d_rd, -path_loss_exp); }

void FadingParams::validate() const {
    if (!(d_sr > 0.0)) throw std::invalid_argument("FadingParams.d_sr: must be > 0");
    if (!(d_rd > 0.0)) throw std::invalid_argument("FadingParams.d_rd: must be > 0");
    if (!(path_loss_exp >= 0.0))
        throw std::invalid_argument("FadingParams.path_loss_exp: must be >= 0");
}

SlotChannel ChannelTrace::slot(int t) const {
    SlotChannel ch;
    ch.h.assign(h.begin() + static_cast<long>(t) * K, h.begin() + static_cast<long>(t + 1) * K);
    ch.g.assign(g.begin() + static_cast<long>(t) * K, g.begin() + static_cast<long>(t + 1) * K);
    return ch;
}

ChannelTrace sample_trace(const SystemParams& params, const FadingParams& fading,
                          std::uint64_t seed) {
    ChannelTrace trace;
    trace.T = params.T;
    trace.K = params.K;
    trace.seed = seed;
    trace.h.resize(static_cast<size_t>(params.T) * params.K);
    trace.g.resize(static_cast<size_t>(params.T) * params.K);

    TraceRng rng(seed);
    const double mh = fading.mean_h2();
    const double mg = fading.mean_g2();
    for (int t = 0; t < params.T; ++t) {
        for (int k = 0; k < params.K; ++k) {
            trace.h[static_cast<size_t>(t) * params.K + k] = draw_gain(rng, mh);
            trace.g[static_cast<size_t>(t) * params.K + k] = draw_gain(rng, mg);
        }
    }
    return trace;
}

LinkQuantizer build_quantizer(double mean_power, int m) {
    if (m < 1) throw std::invalid_argument("build_quantizer: m must be >= 1");
    if (!(mean_power > 0.0))
        throw std::invalid_argument("build_quantizer: mean_power must be > 0");

    LinkQuantizer q;
    q.mean_power = mean_power;
    q.boundaries.resize(static_cast<size_t>(m) + 1);
    q.representatives.resize(static_cast<size_t>(m));
    for (int i = 0; i <= m; ++i) {
        q.boundaries[static_cast<size_t>(i)] =
            (i == m) ? std::numeric_limits<double>::infinity()
                     : -mean_power * std::log1p(-static_cast<double>(i) / m);
    }
    // Conditional mean of Exp(mean) on [a,b): m * [(a+mu)e^{-a/mu} - (b+mu)e^{-b/mu}],
    // each interval having probability 1/m.
    auto tail_moment = [&](double x) {
        if (std::isinf(x)) return 0.0;
        return (x + mean_power) * std::exp(-x / mean_power);
    };
    for (int i = 0; i < m; ++i) {
        const double a = q.boundaries[static_cast<size_t>(i)];
        const double b = q.boundaries[static_cast<size_t>(i) + 1];
        q.representatives[static_cast<size_t>(i)] = m * (tail_moment(a) - tail_moment(b));
    }
    return q;
}

int quantize(double gain_power, const LinkQuantizer& q) {
    const int m = static_cast<int>(q.representatives.size());
    for (int i = 1; i < m; ++i) {
        if (gain_power < q.boundaries[static_cast<size_t>(i)]) return i - 1;
    }
    return m - 1;
}

MarkovQuantizer build_markov_quantizer(const SystemParams& params,
                                       const FadingParams& fading) {
    MarkovQuantizer q;
    q.m = params.m;
    q.K = params.K;
    q.source_relay = build_quantizer(fading.mean_h2(), params.m);
    q.relay_dest = build_quantizer(fading.mean_g2(), params.m);
    return q;
}

long num_channel_states(int m, int K) {
    long n = 1;
    for (int i = 0; i < 2 * K; ++i) n *= m;
    return n;
}

long flatten_state(const std::vector<int>& per_link, int m) {
    long index = 0;
    long stride = 1;
    for (int s : per_link) {
        index += s * stride;
        stride *= m;
    }
    return index;
}

std::vector<int> unflatten_state(long index, int m, int K) {
    std::vector<int> per_link(static_cast<size_t>(2 * K));
    for (int i = 0; i < 2 * K; ++i) {
        per_link[static_cast<size_t>(i)] = static_cast<int>(index % m);
        index /= m;
    }
    return per_link;
}

double transition_prob(long /*from*/, long /*to*/, int m, int K) {
    return 1.0 / static_cast<double>(num_channel_states(m, K));
}

long quantize_slot(const SlotChannel& ch, const MarkovQuantizer& q) {
    std::vector<int> per_link(static_cast<size_t>(2 * q.K));
    for (int k = 0; k < q.K; ++k) {
        per_link[static_cast<size_t>(k)] =
            quantize(std::norm(ch.h[static_cast<size_t>(k)]), q.source_relay);
        per_link[static_cast<size_t>(q.K + k)] =
            quantize(std::norm(ch.g[static_cast<size_t>(k)]), q.relay_dest);
    }
    return flatten_state(per_link, q.m);
}

SlotChannel representative_channel(const MarkovQuantizer& q, long state_index) {
    const std::vector<int> per_link = unflatten_state(state_index, q.m, q.K);
    SlotChannel ch;
    ch.h.resize(static_cast<size_t>(q.K));
    ch.g.resize(static_cast<size_t>(q.K));
    for (int k = 0; k < q.K; ++k) {
        ch.h[static_cast<size_t>(k)] =
            std::sqrt(q.source_relay.representatives[static_cast<size_t>(per_link[static_cast<size_t>(k)])]);
        ch.g[static_cast<size_t>(k)] =
            std::sqrt(q.relay_dest.representatives[static_cast<size_t>(per_link[static_cast<size_t>(q.K + k)])]);
    }
    return ch;
}

void write_trace_csv(const ChannelTrace& trace, std::ostream& os) {
    os << "t,k,re_h,im_h,re_g,im_g\n";
    char buf[256];
    for (int t = 0; t < trace.T; ++t) {
        for (int k = 0; k < trace.K; ++k) {
            const cdouble h = trace.hk(t, k);
            const cdouble g = trace.gk(t, k);
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                          t, k, h.real(), h.imag(), g.real(), g.imag());
            os << buf;
        }
    }
}

ChannelTrace read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("t,k,", 0) != 0)
        throw std::runtime_error("trace csv: missing header");

    ChannelTrace trace;
    std::vector<cdouble> hs, gs;
    std::vector<std::pair<int, int>> idx;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        int t = 0, k = 0;
        double rh = 0, ih = 0, rg = 0, ig = 0;
        if (std::sscanf(line.c_str(), "%d,%d,%lg,%lg,%lg,%lg", &t, &k, &rh, &ih, &rg, &ig) != 6)
            throw std::runtime_error("trace csv: malformed row: " + line);
        hs.emplace_back(rh, ih);
        gs.emplace_back(rg, ig);
        idx.emplace_back(t, k);
    }
    if (idx.empty()) throw std::runtime_error("trace csv: no data rows");
    trace.T = idx.back().first + 1;
    trace.K = idx.back().second + 1;
    if (static_cast<long>(hs.size()) != static_cast<long>(trace.T) * trace.K)
        throw std::runtime_error("trace csv: row count does not match dimensions");
    for (size_t i = 0; i < idx.size(); ++i) {
        const long expect = static_cast<long>(i);
        if (static_cast<long>(idx[i].first) * trace.K + idx[i].second != expect)
            throw std::runtime_error("trace csv: rows not in row-major (t,k) order");
    }
    trace.h = std::move(hs);
    trace.g = std::move(gs);
    return trace;
}

} // namespace psrelay
