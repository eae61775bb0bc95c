#ifndef PSRELAY_CHANNEL_HPP
#define PSRELAY_CHANNEL_HPP

#include "psrelay/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

// Block-fading Rayleigh channel traces and the finite-state Markov quantizer
// used by the causal lookup-table policy. Traces are reproducible bit-exactly:
// the generator is std::mt19937_64 with explicit inverse-CDF transforms (the
// standard library distributions are implementation-defined and avoided).

namespace psrelay {

struct FadingParams {
    double d_sr = 1.0;          // source-relay distance (m)
    double d_rd = 5.0;          // relay-destination distance (m)
    double path_loss_exp = 2.0;

    double mean_h2() const; // E|h|^2 = d_sr^-exp
    double mean_g2() const; // E|g|^2 = d_rd^-exp
    void validate() const;
};

// T x K complex gains for both hops, row-major by slot.
struct ChannelTrace {
    int T = 0;
    int K = 0;
    std::uint64_t seed = 0;
    std::vector<cdouble> h; // [t*K + k]
    std::vector<cdouble> g;

    cdouble hk(int t, int k) const { return h[static_cast<size_t>(t) * K + k]; }
    cdouble gk(int t, int k) const { return g[static_cast<size_t>(t) * K + k]; }
    SlotChannel slot(int t) const;

    bool operator==(const ChannelTrace&) const = default;
};

// |h|^2 and |g|^2 are exponential with the path-loss mean; phases uniform.
// Draw order per slot, per relay: h power, h phase, g power, g phase.
ChannelTrace sample_trace(const SystemParams& params, const FadingParams& fading,
                          std::uint64_t seed);

// Equal-probability partition of one link class's power-gain axis. Boundaries
// are exponential quantiles -mean*ln(1 - i/m); the representative of each
// interval is the conditional mean of the distribution on it.
struct LinkQuantizer {
    double mean_power = 1.0;
    std::vector<double> boundaries;      // m+1 points, first 0, last +inf
    std::vector<double> representatives; // m points, strictly increasing
};

LinkQuantizer build_quantizer(double mean_power, int m);

// Interval index of a power gain; boundary values belong to the upper interval.
int quantize(double gain_power, const LinkQuantizer& q);

// Quantizers for both link classes of the system.
struct MarkovQuantizer {
    int m = 1;
    int K = 1;
    LinkQuantizer source_relay;
    LinkQuantizer relay_dest;
};

MarkovQuantizer build_markov_quantizer(const SystemParams& params,
                                       const FadingParams& fading);

// Joint channel state over 2K links, each in {0..m-1}; layout is the K
// source-relay indices first, then the K relay-destination indices, with the
// first entry least significant in the flattened index.
long num_channel_states(int m, int K);
long flatten_state(const std::vector<int>& per_link, int m);
std::vector<int> unflatten_state(long index, int m, int K);

// Block fading: the next state is independent of the current one, so every
// transition has probability m^-2K.
double transition_prob(long from, long to, int m, int K);

long quantize_slot(const SlotChannel& ch, const MarkovQuantizer& q);

// Real-valued gains sqrt(representative power) for a joint state; phases are
// irrelevant after beamforming.
SlotChannel representative_channel(const MarkovQuantizer& q, long state_index);

// CSV interchange, columns: t, k, re_h, im_h, re_g, im_g.
void write_trace_csv(const ChannelTrace& trace, std::ostream& os);
ChannelTrace read_trace_csv(std::istream& is);

} // namespace psrelay

#endif
