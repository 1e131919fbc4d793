#pragma once

#include <vector>

#include <micromaser/params.hpp>
#include <micromaser/photon_distribution.hpp>

namespace micromaser {

struct SteadyState {
    PhotonDistribution dist;  // normalized to unit sum
    double residual = 0.0;    // ||X dist||_1, certified via apply_generator
    MaserParams params;
};

// Stationary photon distribution from the detailed-balance product
//
//   p_n / p_{n-1} = [nu + n_ex * sin^2(phi*sqrt(n)) / n] / (nu + 1) ,
//
// accumulated in log space. The truncation n_max is the smallest n whose
// tail mass falls below cfg.steady_tail_tol, doubled, clamped to
// [cfg.nmax_floor, cfg.nmax_cap]. Throws NonConvergentTruncation when the
// tail criterion cannot be met below the cap.
SteadyState steady_state(const MaserParams& params,
                         const NumericsConfig& cfg = {});

struct TrappingAngle {
    int n0 = 0;      // photon number at which the cascade closes
    int q = 1;       // completed Rabi cycles per passage
    double phi = 0;  // q*pi/sqrt(n0+1) [rad]
};

// All trapping angles with n0 <= n0_max and phi <= phi_max, sorted by phi.
std::vector<TrappingAngle> trapping_angles(int n0_max, double phi_max);

} // namespace micromaser
