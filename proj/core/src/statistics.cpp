#include <micromaser/statistics.hpp>

#include <cmath>
#include <limits>
#include <string>

#include <micromaser/banded.hpp>
#include <micromaser/errors.hpp>
#include <micromaser/ode.hpp>

#include "horizon.hpp"

namespace micromaser {

namespace {

const char* method_name(TraceMethod m) {
    switch (m) {
        case TraceMethod::time_integration: return "time_integration";
        case TraceMethod::direct_solve: return "direct_solve";
        case TraceMethod::both: return "both";
    }
    return "?";
}

PhotonDistribution jump_seed(const SteadyState& ss, Channel ch) {
    return apply_jump(ChannelSplit{ch, ss.params}, ss.dist);
}

double trace(TraceQuery::LeftOp left, Channel channel, int power,
             PhotonDistribution seed, const SteadyState& ss, TraceMethod method,
             const NumericsConfig& cfg) {
    TraceQuery q;
    q.left = left;
    q.resolvent_channel = {channel, ss.params};
    q.resolvent_power = power;
    q.seed = std::move(seed);
    q.method = method;
    return resolvent_trace(q, cfg);
}

StatReport make_report(std::string name, double value, double uncor,
                       TraceMethod method, const SteadyState& ss,
                       const NumericsConfig& cfg) {
    StatReport r;
    r.name = std::move(name);
    r.value = value;
    r.uncorrelated = uncor;
    r.normalized = uncor != 0.0 ? value / uncor
                                : std::numeric_limits<double>::quiet_NaN();
    r.method = method_name(method);
    r.n_max = ss.dist.n_max();
    r.tolerance = cfg.trace_rtol;
    return r;
}

} // namespace

double RatePair::p_a() const {
    const double s = frac_a + frac_b;
    if (s <= 0.0)
        throw DegenerateChannel("both detection channels have zero rate");
    return frac_a / s;
}

double RatePair::p_b() const {
    const double s = frac_a + frac_b;
    if (s <= 0.0)
        throw DegenerateChannel("both detection channels have zero rate");
    return frac_b / s;
}

RatePair detection_rates(const SteadyState& ss) {
    RatePair r;
    r.params = ss.params;
    r.frac_a = jump_trace(ChannelSplit{Channel::A, ss.params}, ss.dist);
    r.frac_b = jump_trace(ChannelSplit{Channel::B, ss.params}, ss.dist);
    return r;
}

RatePair detection_rates(const MaserParams& params, const NumericsConfig& cfg) {
    return detection_rates(steady_state(params, cfg));
}

InversionPair atomic_inversion(const SteadyState& ss) {
    const RatePair r = detection_rates(ss);
    InversionPair inv;
    inv.per_injected = r.frac_b - r.frac_a;
    inv.per_detected = r.p_b() - r.p_a();  // throws when no detections at all
    return inv;
}

InversionPair atomic_inversion(const MaserParams& params,
                               const NumericsConfig& cfg) {
    return atomic_inversion(steady_state(params, cfg));
}

GammaResult gamma_switch(const SteadyState& ss, TraceMethod method,
                         const NumericsConfig& cfg) {
    const double g_ab = trace(TraceQuery::LeftOp::jump_A, Channel::AB, 1,
                              jump_seed(ss, Channel::B), ss, method, cfg);
    const double g_ba = trace(TraceQuery::LeftOp::jump_B, Channel::AB, 1,
                              jump_seed(ss, Channel::A), ss, method, cfg);
    GammaResult g;
    g.value = 0.5 * (g_ab + g_ba);
    g.ordering_diff = std::abs(g_ab - g_ba);
    return g;
}

SequenceProb sequence_probability(const std::string& seq, const SteadyState& ss,
                                  TraceMethod method, const NumericsConfig& cfg) {
    if (seq.empty()) throw InvalidParams("empty detection sequence");
    if (static_cast<int>(seq.size()) > cfg.max_sequence_length)
        throw InvalidParams("sequence longer than the configured maximum");
    for (char ch : seq)
        if (ch != 'A' && ch != 'B')
            throw InvalidParams("sequence must use the alphabet {A, B}");

    const ChannelSplit both{Channel::AB, ss.params};
    const double f_ab = jump_trace(both, ss.dist);
    if (f_ab <= 0.0)
        throw DegenerateChannel("no detections: sequence probability undefined");

    PhotonDistribution w = ss.dist;
    SequenceProb out;
    out.sequence = seq;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const Channel ch = seq[i] == 'A' ? Channel::A : Channel::B;
        if (i > 0) w = resolvent_apply(both, w, method, cfg);
        if (i + 1 < seq.size())
            w = apply_jump(ChannelSplit{ch, ss.params}, w);
        else
            out.value = jump_trace(ChannelSplit{ch, ss.params}, w) / f_ab;
    }
    return out;
}

SuccessiveRuns mean_successive(const SteadyState& ss, TraceMethod method,
                               const NumericsConfig& cfg) {
    const RatePair r = detection_rates(ss);
    const GammaResult gamma = gamma_switch(ss, method, cfg);
    if (gamma.value == 0.0)
        throw DegenerateChannel("switch probability vanishes: runs never end");

    const double pa = r.p_a();
    const double pb = r.p_b();

    SuccessiveRuns runs;
    runs.gamma = gamma;
    runs.n_a = make_report("n_A", r.frac_a / gamma.value, 1.0 / pb, method, ss, cfg);
    runs.n_b = make_report("n_B", r.frac_b / gamma.value, 1.0 / pa, method, ss, cfg);
    runs.n_mean = make_report("n", r.frac_ab() / (2.0 * gamma.value),
                              1.0 / (2.0 * pa * pb), method, ss, cfg);
    return runs;
}

std::vector<StatReport> waiting_times(const SteadyState& ss, TraceMethod method,
                                      const NumericsConfig& cfg) {
    const RatePair r = detection_rates(ss);
    if (r.frac_a <= 0.0 || r.frac_b <= 0.0)
        throw DegenerateChannel("waiting times need both channel rates nonzero");

    using Left = TraceQuery::LeftOp;
    const PhotonDistribution seed_a = jump_seed(ss, Channel::A);
    const PhotonDistribution seed_b = jump_seed(ss, Channel::B);

    // All raw values below are in tau = r*t units; converted on report.
    const double t_aa =
        trace(Left::jump_A, Channel::A, 2, seed_a, ss, method, cfg) / r.frac_a;
    const double t_bb =
        trace(Left::jump_B, Channel::B, 2, seed_b, ss, method, cfg) / r.frac_b;
    const double t2_aa =
        2.0 * trace(Left::identity_trace, Channel::A, 1, ss.dist, ss, method, cfg) /
        r.frac_a;
    const double t2_bb =
        2.0 * trace(Left::identity_trace, Channel::B, 1, ss.dist, ss, method, cfg) /
        r.frac_b;
    const double t_ab =
        trace(Left::identity_trace, Channel::B, 1, seed_a, ss, method, cfg) /
        r.frac_a;
    const double t_ba =
        trace(Left::identity_trace, Channel::A, 1, seed_b, ss, method, cfg) /
        r.frac_b;

    const double tu = ss.params.report_time(1.0);
    std::vector<StatReport> out;
    out.push_back(make_report("t_AA", t_aa * tu, tu / r.frac_a, method, ss, cfg));
    out.push_back(make_report("t_BB", t_bb * tu, tu / r.frac_b, method, ss, cfg));
    out.push_back(make_report("t2_AA", t2_aa * tu * tu,
                              2.0 * tu * tu / (r.frac_a * r.frac_a), method, ss, cfg));
    out.push_back(make_report("t2_BB", t2_bb * tu * tu,
                              2.0 * tu * tu / (r.frac_b * r.frac_b), method, ss, cfg));
    out.push_back(make_report("t_AB", t_ab * tu, tu / r.frac_b, method, ss, cfg));
    out.push_back(make_report("t_BA", t_ba * tu, tu / r.frac_a, method, ss, cfg));
    return out;
}

double fano_mandel(Channel channel, double t, const SteadyState& ss,
                   const NumericsConfig& cfg) {
    if (channel == Channel::AB)
        throw InvalidParams("counting statistics are per single channel");
    const bool infinite_window = std::isinf(t);
    if (!infinite_window && !(t > 0.0))
        throw InvalidParams("observation window must be positive");

    const ChannelSplit split{channel, ss.params};
    const double f = jump_trace(split, ss.dist);
    if (f <= 0.0) throw DegenerateChannel("channel rate vanishes");

    // Traceless correlation seed: the post-detection state minus the
    // stationary state.
    PhotonDistribution seed = apply_jump(split, ss.dist);
    for (int n = 0; n <= seed.n_max(); ++n)
        seed.weights[n] = seed.weights[n] / f - ss.dist.weights[n];

    const std::size_t n = seed.weights.size();
    const BandedMatrix xm = generator_matrix(ss.params, seed.n_max());
    const std::vector<double> c = left_trace_vector(
        channel == Channel::A ? TraceQuery::LeftOp::jump_A
                              : TraceQuery::LeftOp::jump_B,
        ss.params, seed.n_max());
    const OdeOptions opt = detail::ode_options_for(xm, 0.0, cfg);

    if (infinite_window) {
        // Weight (1 - tau/T) tends to 1; integrate the plain correlation.
        // The full generator keeps the stationary direction alive, so any
        // round-off trace in the seed would never decay: project it out, and
        // accept convergence once the transported vector has emptied.
        const double stray = seed.sum();
        for (int i = 0; i <= seed.n_max(); ++i)
            seed.weights[i] -= stray * ss.dist.weights[i];
        const double seed_l1 = seed.l1_norm();

        std::vector<double> y(n + 1, 0.0);
        std::copy(seed.weights.begin(), seed.weights.end(), y.begin());
        auto rhs = [&xm, &c, n](double, const double* yv, double* dydt) {
            xm.apply(std::span<const double>(yv, n), std::span<double>(dydt, n));
            double g = 0.0;
            for (std::size_t i = 0; i < n; ++i) g += c[i] * yv[i];
            dydt[n] = g;
        };

        double t0 = 0.0;
        double horizon = std::max(4.0, ss.params.n_ex);
        double previous = 0.0;
        while (true) {
            integrate_ode(rhs, y, t0, horizon, opt);
            double l1 = 0.0;
            for (std::size_t i = 0; i < n; ++i) l1 += std::abs(y[i]);
            const bool integral_settled =
                std::abs(y[n] - previous) <=
                1e-3 * cfg.trace_rtol * std::abs(y[n]) + 1e-16;
            if (integral_settled || l1 <= 1e-12 * seed_l1) break;
            if (horizon > cfg.max_horizon)
                throw NonDecayingTail(
                    "counting correlation did not decay by tau = " +
                    std::to_string(horizon));
            previous = y[n];
            t0 = horizon;
            horizon *= 2.0;
        }
        return 2.0 * y[n];
    }

    const double window = ss.params.tau_from_reported(t);
    std::vector<double> y(n + 2, 0.0);
    std::copy(seed.weights.begin(), seed.weights.end(), y.begin());
    auto rhs = [&xm, &c, n](double tau, const double* yv, double* dydt) {
        xm.apply(std::span<const double>(yv, n), std::span<double>(dydt, n));
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += c[i] * yv[i];
        dydt[n] = g;
        dydt[n + 1] = tau * g;
    };
    integrate_ode(rhs, y, 0.0, window, opt);
    return 2.0 * (y[n] - y[n + 1] / window);
}

} // namespace micromaser
