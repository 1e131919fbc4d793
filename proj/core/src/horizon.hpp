#pragma once

// Internal helpers shared by the propagator and statistics translation
// units. Not installed.

#include <cmath>
#include <string>
#include <vector>

#include <micromaser/banded.hpp>
#include <micromaser/errors.hpp>
#include <micromaser/ode.hpp>
#include <micromaser/params.hpp>

namespace micromaser::detail {

inline OdeOptions ode_options_for(const BandedMatrix& m, double tol,
                                  const NumericsConfig& cfg) {
    OdeOptions opt;
    opt.rtol = tol > 0.0 ? tol : cfg.ode_rtol;
    opt.atol = cfg.ode_atol;
    opt.rate_scale = m.max_abs_diagonal() + 1.0;
    opt.fixed_dt = cfg.fixed_dt;
    return opt;
}

struct HorizonResult {
    double horizon = 0.0;
    long steps = 0;
};

// Doubles the integration horizon until the monitored quantity moves by
// less than `converged` relative (with an absolute floor) across the last
// doubling. Each segment continues from the state reached so far.
template <class Rhs, class Measure>
HorizonResult integrate_to_convergence(Rhs&& rhs, std::vector<double>& y,
                                       Measure&& current_value,
                                       double converged, double abs_floor,
                                       const OdeOptions& opt,
                                       const NumericsConfig& cfg,
                                       double first_horizon) {
    HorizonResult hr;
    double t = 0.0;
    double horizon = first_horizon;
    double previous = current_value();
    while (true) {
        OdeStats st = integrate_ode(rhs, y, t, horizon, opt);
        hr.steps += st.steps;
        const double now = current_value();
        if (std::abs(now - previous) <=
            std::max(converged * std::abs(now), abs_floor)) {
            hr.horizon = horizon;
            return hr;
        }
        if (horizon > cfg.max_horizon)
            throw NonDecayingTail(
                "improper time integral did not converge by tau = " +
                std::to_string(horizon));
        previous = now;
        t = horizon;
        horizon *= 2.0;
    }
}

} // namespace micromaser::detail
