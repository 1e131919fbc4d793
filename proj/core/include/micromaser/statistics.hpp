#pragma once

#include <string>
#include <vector>

#include <micromaser/params.hpp>
#include <micromaser/propagator.hpp>
#include <micromaser/steady_state.hpp>

namespace micromaser {

// Stationary detection rates. frac_* are detections per injected atom,
// tr{X+_A rho_ss} and tr{X+_B rho_ss}; rate_* converts to the reported unit.
struct RatePair {
    double frac_a = 0.0;
    double frac_b = 0.0;
    MaserParams params;

    double rate_a() const { return params.report_rate(frac_a); }
    double rate_b() const { return params.report_rate(frac_b); }
    double frac_ab() const { return frac_a + frac_b; }

    // Probability that a detected atom came out on channel A (resp. B).
    // Throws DegenerateChannel when no detections happen at all.
    double p_a() const;
    double p_b() const;
};

// One named observable with its uncorrelated baseline, the ratio of the two,
// and the evaluation metadata.
struct StatReport {
    std::string name;
    double value = 0.0;
    double uncorrelated = 0.0;
    double normalized = 0.0;  // value / uncorrelated
    std::string method;
    int n_max = 0;
    double tolerance = 0.0;
};

struct SequenceProb {
    std::string sequence;  // over the alphabet {A, B}, first detection first
    double value = 0.0;
};

struct InversionPair {
    double per_injected = 0.0;  // (r_b - r_a)/r: any injected atom
    double per_detected = 0.0;  // P[B] - P[A]:   any detected atom
};

struct GammaResult {
    double value = 0.0;          // averaged over both operator orderings
    double ordering_diff = 0.0;  // |difference|, a pipeline-error estimate
};

struct SuccessiveRuns {
    StatReport n_a;     // mean run of consecutive A detections
    StatReport n_b;     // mean run of consecutive B detections
    StatReport n_mean;  // mean run of either kind
    GammaResult gamma;
};

RatePair detection_rates(const SteadyState& ss);
RatePair detection_rates(const MaserParams& params, const NumericsConfig& cfg = {});

InversionPair atomic_inversion(const SteadyState& ss);
InversionPair atomic_inversion(const MaserParams& params, const NumericsConfig& cfg = {});

// Switch probability numerator: tr{X+_A (-1/X-_AB) X+_B rho_ss}, evaluated
// in both orderings and averaged.
GammaResult gamma_switch(const SteadyState& ss,
                         TraceMethod method = TraceMethod::time_integration,
                         const NumericsConfig& cfg = {});

// Probability that n successive detections realize `seq`, evaluated as the
// right-to-left jump chain interleaved with (-1/X-_AB).
SequenceProb sequence_probability(const std::string& seq, const SteadyState& ss,
                                  TraceMethod method = TraceMethod::time_integration,
                                  const NumericsConfig& cfg = {});

// Mean numbers of successive same-channel detections. Throws
// DegenerateChannel when no switches ever occur (gamma == 0).
SuccessiveRuns mean_successive(const SteadyState& ss,
                               TraceMethod method = TraceMethod::time_integration,
                               const NumericsConfig& cfg = {});

// Mean waiting times t_AA, t_BB (computed, not assumed, so the identity
// value*rate == 1 acts as an end-to-end check), second moments t2_AA, t2_BB,
// and the cross-channel times t_AB, t_BA. Times are reported in
// params.time_unit; second moments in its square.
std::vector<StatReport> waiting_times(const SteadyState& ss,
                                      TraceMethod method = TraceMethod::time_integration,
                                      const NumericsConfig& cfg = {});

// Counting-fluctuation function for the chosen channel over an observation
// window t (reported unit; INFINITY for the stationary limit): the
// normalized variance excess of the detection count over Poisson.
double fano_mandel(Channel channel, double t, const SteadyState& ss,
                   const NumericsConfig& cfg = {});

} // namespace micromaser
