#pragma once

#include <cstdint>
#include <string>

#include <micromaser/params.hpp>
#include <micromaser/propagator.hpp>

namespace maser_cli {

// Options shared by every subcommand; mirrored one-to-one by the flat
// key=value config file.
struct CliOptions {
    micromaser::MaserParams params;
    micromaser::NumericsConfig numerics;

    double tint_us = -1.0;  // interaction time; <0 means phi was given
    double g_khz = 39.0;
    double eta_both = -1.0;
    std::string time_unit = "gamma";  // gamma | r
    std::string method = "time";      // time | direct | both
    double tol = 0.0;                 // overrides ode_rtol when > 0
    std::uint64_t seed = 12345;
    double sigma_tint_us = 0.0;
    std::string out_path;
    int threads = 0;
    bool dump_config = false;

    // Applies the cross-field rules (eta shorthand, tint -> phi, unit and
    // method names); throws micromaser::InvalidParams on conflicts.
    void resolve(bool tint_given, bool phi_given, bool eta_given);

    micromaser::TraceMethod trace_method() const;
    std::string config_text() const;
};

// Exit codes: 0 ok, 1 numerical failure, 2 invalid configuration.
int run_verify(const CliOptions& opt, long mc_atoms, bool skip_mc,
               bool fault_inject);
int run_mc_verify(const CliOptions& opt, long mc_atoms,
                  const std::string& dump_path = {});

} // namespace maser_cli
