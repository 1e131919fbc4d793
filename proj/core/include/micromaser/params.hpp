#pragma once

#include <micromaser/errors.hpp>

namespace micromaser {

// Unit in which times and rates are reported at the API boundary.
// Internally every evolution runs in the scaled time tau = r*t, i.e. time
// measured in mean atom-injection intervals. One cavity photon lifetime
// 1/gamma equals n_ex such intervals.
enum class TimeUnit { cavity_decay, atom_injection };

// Detection channel: atoms leaving excited (A), de-excited (B), or either.
enum class Channel { A, B, AB };

struct MaserParams {
    double n_ex = 7.0;   // atoms injected per cavity photon lifetime, r/gamma
    double nu = 0.054;   // mean thermal photon number of the reservoir
    double phi = 1.0;    // accumulated Rabi angle [rad]
    double eta_a = 1.0;  // efficiency of the excited-state detector
    double eta_b = 1.0;  // efficiency of the de-excited-state detector
    TimeUnit time_unit = TimeUnit::cavity_decay;

    void validate() const;

    // tau = r*t  <->  reported time
    double report_time(double tau) const {
        return time_unit == TimeUnit::cavity_decay ? tau / n_ex : tau;
    }
    double tau_from_reported(double t) const {
        return time_unit == TimeUnit::cavity_decay ? t * n_ex : t;
    }
    // rate per tau  <->  reported rate
    double report_rate(double rate_per_tau) const {
        return time_unit == TimeUnit::cavity_decay ? rate_per_tau * n_ex
                                                   : rate_per_tau;
    }
};

// Numerical knobs shared across the library. Defaults are suitable for desk
// scale (n_ex up to a few tens) and are printable through the CLI so every
// output is reproducible from its own header.
struct NumericsConfig {
    int nmax_floor = 32;
    int nmax_cap = 1024;
    double steady_tail_tol = 1e-12;  // stationary mass allowed beyond n_max/2
    double steady_residual_tol = 1e-10;
    double truncation_tol = 1e-9;    // relative clipped-mass error threshold
    double ode_rtol = 1e-11;
    double ode_atol = 1e-16;
    double fixed_dt = 0.0;           // > 0 selects the fixed-step integrator
    double trace_rtol = 1e-9;        // target accuracy of improper integrals
    double crosscheck_rtol = 1e-7;   // time-integration vs direct-solve
    double max_horizon = 1e7;        // cap for horizon doubling, in tau
    int max_sequence_length = 8;
    long mc_burn_in_atoms = 0;       // 0 = automatic
};

} // namespace micromaser
