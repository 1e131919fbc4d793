#include <micromaser/steady_state.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <micromaser/errors.hpp>
#include <micromaser/fock_ops.hpp>

namespace micromaser {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Detailed-balance factor p_n / p_{n-1}.
double balance_factor(const MaserParams& mp, int n) {
    const double s = std::sin(mp.phi * std::sqrt(static_cast<double>(n)));
    return (mp.nu + mp.n_ex * s * s / n) / (mp.nu + 1.0);
}

} // namespace

SteadyState steady_state(const MaserParams& params, const NumericsConfig& cfg) {
    params.validate();
    if (cfg.nmax_cap < cfg.nmax_floor)
        throw InvalidParams("nmax_cap below nmax_floor");

    // Unnormalized log-weights. Factors can span hundreds of orders of
    // magnitude at large n_ex, so everything stays in log space until the
    // final exponentiation against the running maximum.
    std::vector<double> logw{0.0};
    double log_max = 0.0;
    const double stop_margin = std::log(cfg.steady_tail_tol) - 40.0;

    for (int n = 1; n <= cfg.nmax_cap; ++n) {
        const double f = balance_factor(params, n);
        const double prev = logw.back();
        const double cur = (f == 0.0 || prev == kNegInf)
                               ? kNegInf
                               : prev + std::log(f);
        logw.push_back(cur);
        log_max = std::max(log_max, cur);
        // Beyond n > n_ex every factor is < 1, so the remaining tail is
        // dominated by a geometric series; 40 nats of margin cover it.
        if (cur == kNegInf) break;
        if (n > params.n_ex && cur - log_max < stop_margin) break;
    }

    const int extent = static_cast<int>(logw.size()) - 1;

    std::vector<double> p(logw.size());
    double norm = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
        p[i] = logw[i] == kNegInf ? 0.0 : std::exp(logw[i] - log_max);
        norm += p[i];
    }
    for (double& v : p) v /= norm;

    // Smallest n with tail mass below the tolerance. If the scan above hit
    // the cap with a fat tail still ahead, the criterion is unreachable.
    double tail = 0.0;
    int n_star = extent;
    for (int n = extent; n >= 1; --n) {
        tail += p[n];
        if (tail >= cfg.steady_tail_tol) {
            n_star = n;
            break;
        }
        n_star = n - 1;
    }
    if (extent == cfg.nmax_cap &&
        (logw.back() != kNegInf && logw.back() - log_max >= stop_margin))
        throw NonConvergentTruncation(
            "stationary tail does not fall below tolerance under the n_max cap");
    if (n_star >= cfg.nmax_cap)
        throw NonConvergentTruncation(
            "stationary tail criterion not met below the n_max cap");

    const int n_max =
        std::max(cfg.nmax_floor, std::min(2 * n_star, cfg.nmax_cap));

    SteadyState ss;
    ss.params = params;
    ss.dist = PhotonDistribution::zeros(n_max);
    double kept = 0.0;
    for (int n = 0; n <= std::min(n_max, extent); ++n) {
        ss.dist.weights[n] = p[n];
        kept += p[n];
    }
    for (double& w : ss.dist.weights) w /= kept;
    ss.dist.truncation_loss = std::max(0.0, 1.0 - kept);

    ss.residual = apply_generator(ss.dist, params).l1_norm();
    return ss;
}

std::vector<TrappingAngle> trapping_angles(int n0_max, double phi_max) {
    if (n0_max < 0) throw InvalidParams("n0_max must be nonnegative");
    if (!(phi_max > 0.0)) throw InvalidParams("phi_max must be positive");

    std::vector<TrappingAngle> out;
    const double pi = std::acos(-1.0);
    for (int n0 = 0; n0 <= n0_max; ++n0) {
        const double root = std::sqrt(static_cast<double>(n0 + 1));
        for (int q = 1;; ++q) {
            const double phi = q * pi / root;
            if (phi > phi_max) break;
            out.push_back({n0, q, phi});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const TrappingAngle& a, const TrappingAngle& b) {
                  return a.phi < b.phi;
              });
    return out;
}

} // namespace micromaser
