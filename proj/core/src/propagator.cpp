#include <micromaser/propagator.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <micromaser/banded.hpp>
#include <micromaser/errors.hpp>
#include <micromaser/ode.hpp>

#include "horizon.hpp"

namespace micromaser {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Catches evolutions that pile weight against the truncation boundary. The
// initial scale enters the reference so a vector that has decayed to the
// round-off floor is not mistaken for boundary pile-up.
void check_tail(const std::vector<double>& w, double initial_l1,
                const NumericsConfig& cfg) {
    if (w.empty()) return;
    double max_abs = 0.0;
    for (double v : w) max_abs = std::max(max_abs, std::abs(v));
    const double scale = std::max({max_abs, 1e-6 * initial_l1, 1e-300});
    if (std::abs(w.back()) >
        cfg.truncation_tol * scale + 1e3 * cfg.ode_atol)
        throw TruncationOverflow(
            "evolved state carries weight at the truncation boundary");
}

} // namespace

std::vector<double> left_trace_vector(TraceQuery::LeftOp left,
                                      const MaserParams& params, int n_max) {
    std::vector<double> c(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int n = 0; n <= n_max; ++n) {
        const double arg = params.phi * std::sqrt(static_cast<double>(n + 1));
        const double cs = std::cos(arg), sn = std::sin(arg);
        switch (left) {
            case TraceQuery::LeftOp::jump_A:
                c[n] = params.eta_a * cs * cs;
                break;
            case TraceQuery::LeftOp::jump_B:
                c[n] = params.eta_b * sn * sn;
                break;
            case TraceQuery::LeftOp::jump_AB:
                c[n] = params.eta_a * cs * cs + params.eta_b * sn * sn;
                break;
            case TraceQuery::LeftOp::identity_trace:
                c[n] = 1.0;
                break;
        }
    }
    return c;
}

EvolutionResult evolve_no_detection(const ChannelSplit& split,
                                    const PhotonDistribution& p0,
                                    double duration, double tol,
                                    const NumericsConfig& cfg) {
    split.params.validate();
    if (duration < 0.0) throw InvalidParams("duration must be nonnegative");

    EvolutionResult res;
    res.final = p0;
    if (duration > 0.0) {
        const BandedMatrix xm = no_detection_matrix(split, p0.n_max());
        const std::size_t n = p0.weights.size();
        auto rhs = [&xm, n](double, const double* y, double* dydt) {
            xm.apply(std::span<const double>(y, n), std::span<double>(dydt, n));
        };
        OdeStats st = integrate_ode(rhs, res.final.weights, 0.0, duration,
                                    detail::ode_options_for(xm, tol, cfg));
        res.steps = st.steps;
        res.est_error = st.est_error;
        check_tail(res.final.weights, p0.l1_norm(), cfg);
    }
    res.u_final = res.final.sum();
    return res;
}

PhotonDistribution propagate_unconditioned(const PhotonDistribution& p0,
                                           const MaserParams& params,
                                           double duration, double tol,
                                           const NumericsConfig& cfg) {
    params.validate();
    if (duration < 0.0) throw InvalidParams("duration must be nonnegative");

    PhotonDistribution out = p0;
    if (duration == 0.0) return out;

    const BandedMatrix xm = generator_matrix(params, p0.n_max());
    const std::size_t n = p0.weights.size();
    auto rhs = [&xm, n](double, const double* y, double* dydt) {
        xm.apply(std::span<const double>(y, n), std::span<double>(dydt, n));
    };
    integrate_ode(rhs, out.weights, 0.0, duration,
                  detail::ode_options_for(xm, tol, cfg));
    check_tail(out.weights, p0.l1_norm(), cfg);
    return out;
}

namespace {

// A channel whose jump functional vanishes identically (detector off, or a
// de-excitation channel at phi = 0) leaves X- trace-preserving, hence
// singular up to boundary round-off that partial pivoting cannot reveal.
// Detect that structurally before factorizing.
BandedLU factor_negated_no_detection(const ChannelSplit& split, int n_max) {
    const TraceQuery::LeftOp tag = split.channel == Channel::A
                                       ? TraceQuery::LeftOp::jump_A
                                   : split.channel == Channel::B
                                       ? TraceQuery::LeftOp::jump_B
                                       : TraceQuery::LeftOp::jump_AB;
    double jump_total = 0.0;
    for (double v : left_trace_vector(tag, split.params, n_max)) jump_total += v;
    if (jump_total == 0.0)
        throw SingularOperator(
            "no-detection generator is singular: the channel never fires");

    BandedMatrix m = no_detection_matrix(split, n_max);
    m.scale(-1.0);  // (-X-), positive-stable for an open channel
    const double scale = m.max_abs_diagonal();
    BandedLU lu(std::move(m));
    if (lu.min_abs_pivot() < 1e-13 * scale)
        throw SingularOperator("no-detection generator is numerically singular");
    return lu;
}

double resolvent_trace_direct(const TraceQuery& q) {
    const int n_max = q.seed.n_max();
    const BandedLU lu =
        factor_negated_no_detection(q.resolvent_channel, n_max);

    std::vector<double> w = q.seed.weights;
    for (int k = 0; k < q.resolvent_power; ++k) lu.solve_in_place(w);

    const std::vector<double> c =
        left_trace_vector(q.left, q.resolvent_channel.params, n_max);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += c[i] * w[i];
    return acc;
}

double resolvent_trace_time(const TraceQuery& q, const NumericsConfig& cfg) {
    const int n_max = q.seed.n_max();
    const std::size_t n = q.seed.weights.size();
    const BandedMatrix xm = no_detection_matrix(q.resolvent_channel, n_max);
    const std::vector<double> c =
        left_trace_vector(q.left, q.resolvent_channel.params, n_max);
    const int k = q.resolvent_power;
    const double weight_norm = 1.0 / factorial(k - 1);

    // State: conditioned weights plus the running quadrature
    //   J(tau) = integral of  tau^{k-1}/(k-1)! * (c . w) .
    std::vector<double> y(n + 1, 0.0);
    std::copy(q.seed.weights.begin(), q.seed.weights.end(), y.begin());

    auto rhs = [&xm, &c, n, k, weight_norm](double t, const double* yv,
                                            double* dydt) {
        xm.apply(std::span<const double>(yv, n), std::span<double>(dydt, n));
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += c[i] * yv[i];
        dydt[n] = (k == 1 ? 1.0 : std::pow(t, k - 1) * weight_norm) * g;
    };

    const OdeOptions opt = detail::ode_options_for(xm, 0.0, cfg);
    detail::integrate_to_convergence(
        rhs, y, [&y, n] { return y[n]; }, 1e-3 * cfg.trace_rtol,
        1e-18 * (1.0 + q.seed.l1_norm()), opt, cfg,
        std::max(4.0, q.resolvent_channel.params.n_ex));
    return y[n];
}

} // namespace

double resolvent_trace(const TraceQuery& q, const NumericsConfig& cfg) {
    q.resolvent_channel.params.validate();
    if (q.resolvent_power < 1 || q.resolvent_power > 3)
        throw InvalidParams("resolvent power must lie in 1..3");
    if (q.seed.weights.empty()) throw InvalidParams("empty seed");

    switch (q.method) {
        case TraceMethod::direct_solve:
            return resolvent_trace_direct(q);
        case TraceMethod::time_integration:
            return resolvent_trace_time(q, cfg);
        case TraceMethod::both: {
            const double ti = resolvent_trace_time(q, cfg);
            const double ds = resolvent_trace_direct(q);
            const double scale = std::max(std::abs(ti), std::abs(ds));
            const double floor = 1e-12 * (1.0 + q.seed.l1_norm());
            if (std::abs(ti - ds) > cfg.crosscheck_rtol * std::max(scale, floor))
                throw CrossCheckMismatch("time integration " + std::to_string(ti) +
                                         " vs direct solve " + std::to_string(ds));
            return ti;
        }
    }
    throw InvalidParams("unknown trace method");
}

PhotonDistribution resolvent_apply(const ChannelSplit& split,
                                   const PhotonDistribution& w,
                                   TraceMethod method,
                                   const NumericsConfig& cfg) {
    split.params.validate();
    const int n_max = w.n_max();

    if (method == TraceMethod::direct_solve || method == TraceMethod::both) {
        const BandedLU lu = factor_negated_no_detection(split, n_max);
        PhotonDistribution direct = w;
        lu.solve_in_place(direct.weights);
        if (method == TraceMethod::direct_solve) return direct;

        PhotonDistribution ti =
            resolvent_apply(split, w, TraceMethod::time_integration, cfg);
        double diff = 0.0;
        for (int i = 0; i <= n_max; ++i)
            diff = std::max(diff, std::abs(ti.weights[i] - direct.weights[i]));
        if (diff > cfg.crosscheck_rtol * std::max(direct.l1_norm(), 1e-12))
            throw CrossCheckMismatch("resolvent apply routes disagree");
        return ti;
    }

    // Time route: carry the conditioned vector together with its running
    // time integral, which converges to (-1/X-) w.
    const std::size_t n = w.weights.size();
    const BandedMatrix xm = no_detection_matrix(split, n_max);
    std::vector<double> y(2 * n, 0.0);
    std::copy(w.weights.begin(), w.weights.end(), y.begin());

    auto rhs = [&xm, n](double, const double* yv, double* dydt) {
        xm.apply(std::span<const double>(yv, n), std::span<double>(dydt, n));
        for (std::size_t i = 0; i < n; ++i) dydt[n + i] = yv[i];
    };
    auto integral_norm = [&y, n] {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += std::abs(y[n + i]);
        return norm;
    };

    const OdeOptions opt = detail::ode_options_for(xm, 0.0, cfg);
    detail::integrate_to_convergence(rhs, y, integral_norm,
                                     1e-3 * cfg.trace_rtol,
                                     1e-18 * (1.0 + w.l1_norm()), opt, cfg,
                                     std::max(4.0, split.params.n_ex));

    PhotonDistribution out = w;
    for (std::size_t i = 0; i < n; ++i) out.weights[i] = y[n + i];
    return out;
}

} // namespace micromaser
