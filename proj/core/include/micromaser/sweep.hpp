#pragma once

#include <string>
#include <vector>

#include <micromaser/params.hpp>
#include <micromaser/propagator.hpp>
#include <micromaser/steady_state.hpp>

namespace micromaser {

enum class SweepAxis { phi, t_int };

struct SweepSpec {
    SweepAxis axis = SweepAxis::phi;
    double start = 0.1;
    double stop = 10.0;
    int points = 100;
    double coupling_g_khz = 39.0;  // used by the t_int axis: phi = g * t_int
    std::vector<std::string> observables;
    double t_int_sigma_us = 0.0;   // Gaussian interaction-time spread; 0 = off
    int gauss_points = 21;         // quadrature nodes for the averaging
    MaserParams params;
    NumericsConfig numerics;
    TraceMethod method = TraceMethod::time_integration;
    int threads = 0;               // 0 = hardware concurrency
    int trap_n0_max = 4;           // trapping angles annotated up to this n0
};

struct SweepResult {
    std::string csv;  // header comment, column row, one row per grid point
    std::vector<TrappingAngle> markers;
};

// Evaluates the requested observables over the grid. Rows appear in axis
// order regardless of the worker count; a failing point is recorded in its
// status column and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec);

// Names accepted in SweepSpec::observables.
std::vector<std::string> known_observables();

// Evaluates one observable at a single parameter point.
double evaluate_observable(const std::string& name, const MaserParams& params,
                           TraceMethod method, const NumericsConfig& cfg);

// Gauss-Hermite rule for integral of exp(-x^2) f(x) dx: nodes and weights.
void gauss_hermite(int k, std::vector<double>& nodes,
                   std::vector<double>& weights);

std::string format_csv_number(double v);

} // namespace micromaser
