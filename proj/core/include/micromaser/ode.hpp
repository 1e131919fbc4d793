#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <micromaser/errors.hpp>

namespace micromaser {

struct OdeOptions {
    double rtol = 1e-11;
    double atol = 1e-16;
    double initial_dt = 0.0;  // 0 = derive from rate_scale
    double rate_scale = 1.0;  // magnitude of the fastest rate in the system
    double fixed_dt = 0.0;    // > 0 selects the fixed-step classic RK4
    double max_dt = 0.0;      // 0 = unbounded
};

struct OdeStats {
    long steps = 0;
    long rejected = 0;
    double est_error = 0.0;  // sum of accepted local error estimates
};

// Dormand-Prince 5(4) embedded pair with FSAL and a step controller, plus a
// fixed-step RK4 mode for bit-reproducible runs. The right-hand side is
// called as f(t, y, dydt) on arrays of y.size() doubles.
template <class Rhs>
OdeStats integrate_ode(Rhs&& f, std::vector<double>& y, double t0, double t1,
                       const OdeOptions& opt) {
    const std::size_t n = y.size();
    OdeStats stats;
    if (t1 <= t0) return stats;

    if (opt.fixed_dt > 0.0) {
        // Classic RK4 on a uniform grid covering [t0, t1] exactly.
        const double span = t1 - t0;
        const long m =
            std::max<long>(1, static_cast<long>(std::ceil(span / opt.fixed_dt)));
        const double h = span / static_cast<double>(m);
        std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
        double t = t0;
        for (long step = 0; step < m; ++step) {
            f(t, y.data(), k1.data());
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
            f(t + 0.5 * h, tmp.data(), k2.data());
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            f(t + 0.5 * h, tmp.data(), k3.data());
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
            f(t + h, tmp.data(), k4.data());
            for (std::size_t i = 0; i < n; ++i)
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            t = t0 + span * static_cast<double>(step + 1) / static_cast<double>(m);
            ++stats.steps;
        }
        return stats;
    }

    // Dormand-Prince coefficients.
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    // b - b*, the 5th-minus-4th order difference for the error estimate.
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n),
        ytmp(n), ynew(n);

    double t = t0;
    double h = opt.initial_dt > 0.0
                   ? opt.initial_dt
                   : std::min(t1 - t0, 0.5 / std::max(opt.rate_scale, 1e-300));
    if (opt.max_dt > 0.0) h = std::min(h, opt.max_dt);

    f(t, y.data(), k1.data());  // FSAL: k1 always matches (t, y)

    while (t < t1) {
        h = std::min(h, t1 - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw StepSizeUnderflow("step size underflow in adaptive integrator");

        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        f(t + c2 * h, ytmp.data(), k2.data());
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, ytmp.data(), k3.data());
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, ytmp.data(), k4.data());
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                                  a54 * k4[i]);
        f(t + c5 * h, ytmp.data(), k5.data());
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                  a64 * k4[i] + a65 * k5[i]);
        f(t + h, ytmp.data(), k6.data());
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                  b5 * k5[i] + b6 * k6[i]);
        f(t + h, ynew.data(), k7.data());

        double err_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                    e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double scale =
                opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = err / scale;
            err_sq += r * r;
        }
        const double err_norm = std::sqrt(err_sq / static_cast<double>(n));

        if (!std::isfinite(err_norm)) {
            ++stats.rejected;
            h *= 0.1;
            continue;
        }

        if (err_norm <= 1.0) {
            t += h;
            y.swap(ynew);
            k1.swap(k7);
            ++stats.steps;
            stats.est_error += err_norm;
        } else {
            ++stats.rejected;
        }

        double factor = 0.9 * std::pow(std::max(err_norm, 1e-10), -0.2);
        h *= std::clamp(factor, 0.2, 5.0);
        if (opt.max_dt > 0.0) h = std::min(h, opt.max_dt);
    }
    return stats;
}

} // namespace micromaser
