#pragma once

#include <micromaser/fock_ops.hpp>
#include <micromaser/params.hpp>
#include <micromaser/photon_distribution.hpp>

namespace micromaser {

struct EvolutionResult {
    PhotonDistribution final;
    double u_final = 0.0;  // exclusion probability: sum of the final weights
    long steps = 0;
    double est_error = 0.0;
};

enum class TraceMethod { time_integration, direct_solve, both };

// One trace of the form  tr{ O_left (-1/X-)^k  seed }.
struct TraceQuery {
    enum class LeftOp { jump_A, jump_B, jump_AB, identity_trace };

    LeftOp left = LeftOp::identity_trace;
    ChannelSplit resolvent_channel;
    int resolvent_power = 1;  // 1..3
    PhotonDistribution seed;
    TraceMethod method = TraceMethod::time_integration;
};

// Propagates p0 for `duration` (in tau = r*t) under the no-detection
// generator X- of the channel. `tol` is the local relative error target;
// pass 0 to take cfg.ode_rtol.
EvolutionResult evolve_no_detection(const ChannelSplit& split,
                                    const PhotonDistribution& p0,
                                    double duration, double tol,
                                    const NumericsConfig& cfg = {});

// Trace-preserving propagation under the full generator X.
PhotonDistribution propagate_unconditioned(const PhotonDistribution& p0,
                                           const MaserParams& params,
                                           double duration, double tol,
                                           const NumericsConfig& cfg = {});

// Evaluates the trace query. The time-integration route propagates the seed
// under X- and accumulates the t^{k-1}/(k-1)! weighted quadrature of the
// left trace; the direct route performs k banded solves with (-X-).
// method == both evaluates both, returns the time-integration value, and
// throws CrossCheckMismatch when they disagree beyond cfg.crosscheck_rtol.
double resolvent_trace(const TraceQuery& query, const NumericsConfig& cfg = {});

// Applies (-1/X-) of the channel to a weight vector, by either route.
PhotonDistribution resolvent_apply(const ChannelSplit& split,
                                   const PhotonDistribution& w,
                                   TraceMethod method,
                                   const NumericsConfig& cfg = {});

// Coefficient vector c of the left functional, so tr{O w} = c . w.
std::vector<double> left_trace_vector(TraceQuery::LeftOp left,
                                      const MaserParams& params, int n_max);

} // namespace micromaser
