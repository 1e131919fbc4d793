#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <micromaser/errors.hpp>
#include <micromaser/statistics.hpp>
#include <micromaser/sweep.hpp>
#include <micromaser/trajectory.hpp>

#include "common.hpp"

namespace maser_cli {

using namespace micromaser;

void CliOptions::resolve(bool tint_given, bool phi_given, bool eta_given) {
    if (tint_given && phi_given)
        throw InvalidParams("give either --phi or --tint, not both");
    if (tint_given) {
        if (!(g_khz > 0.0)) throw InvalidParams("--tint needs a positive --g-khz");
        params.phi = g_khz * tint_us * 1e-3;
    }
    if (eta_given) {
        params.eta_a = eta_both;
        params.eta_b = eta_both;
    }
    if (time_unit == "gamma")
        params.time_unit = TimeUnit::cavity_decay;
    else if (time_unit == "r")
        params.time_unit = TimeUnit::atom_injection;
    else
        throw InvalidParams("--time-unit must be 'gamma' or 'r'");
    if (method != "time" && method != "direct" && method != "both")
        throw InvalidParams("--method must be time, direct, or both");
    if (tol > 0.0) numerics.ode_rtol = tol;
    params.validate();
}

TraceMethod CliOptions::trace_method() const {
    if (method == "direct") return TraceMethod::direct_solve;
    if (method == "both") return TraceMethod::both;
    return TraceMethod::time_integration;
}

std::string CliOptions::config_text() const {
    std::ostringstream out;
    auto put = [&out](const char* key, double v) {
        out << key << '=' << format_csv_number(v) << '\n';
    };
    put("nex", params.n_ex);
    put("nu", params.nu);
    put("phi", params.phi);
    put("eta-a", params.eta_a);
    put("eta-b", params.eta_b);
    out << "time-unit=" << time_unit << '\n';
    put("g-khz", g_khz);
    put("sigma-tint-us", sigma_tint_us);
    out << "method=" << method << '\n';
    out << "seed=" << seed << '\n';
    out << "threads=" << threads << '\n';
    out << "nmax-floor=" << numerics.nmax_floor << '\n';
    out << "nmax-cap=" << numerics.nmax_cap << '\n';
    put("tail-tol", numerics.steady_tail_tol);
    put("residual-tol", numerics.steady_residual_tol);
    put("truncation-tol", numerics.truncation_tol);
    put("tol", numerics.ode_rtol);
    put("ode-atol", numerics.ode_atol);
    put("fixed-dt", numerics.fixed_dt);
    put("trace-tol", numerics.trace_rtol);
    put("crosscheck-tol", numerics.crosscheck_rtol);
    put("max-horizon", numerics.max_horizon);
    out << "max-seq-length=" << numerics.max_sequence_length << '\n';
    out << "burn-in-atoms=" << numerics.mc_burn_in_atoms << '\n';
    return out.str();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void print_report_table(const std::vector<StatReport>& reports) {
    std::printf("%-8s %14s %14s %14s\n", "name", "value", "uncorrelated",
                "normalized");
    for (const StatReport& r : reports)
        std::printf("%-8s %14.8g %14.8g %14.8g\n", r.name.c_str(), r.value,
                    r.uncorrelated, r.normalized);
}

int write_or_print(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::fputs(text.c_str(), stdout);
        return 0;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::fprintf(stderr, "cannot open %s for writing\n", path.c_str());
        return 1;
    }
    out << text;
    return 0;
}

int cmd_steady(const CliOptions& opt) {
    const SteadyState ss = steady_state(opt.params, opt.numerics);
    double nbar = 0.0;
    for (int n = 0; n <= ss.dist.n_max(); ++n)
        nbar += n * ss.dist.weights[n];
    std::printf("n_max     %d\n", ss.dist.n_max());
    std::printf("residual  %.6g\n", ss.residual);
    std::printf("nbar      %.12g\n", nbar);
    std::printf("p0        %.12g\n", ss.dist.weights[0]);

    if (!opt.out_path.empty()) {
        std::ostringstream csv;
        csv << "# micromaser steady state\n";
        csv << "# nex=" << format_csv_number(opt.params.n_ex)
            << " nu=" << format_csv_number(opt.params.nu)
            << " phi=" << format_csv_number(opt.params.phi)
            << " residual=" << format_csv_number(ss.residual) << "\n";
        csv << "n,p\n";
        for (int n = 0; n <= ss.dist.n_max(); ++n)
            csv << n << ',' << format_csv_number(ss.dist.weights[n]) << '\n';
        return write_or_print(opt.out_path, csv.str());
    }
    return 0;
}

int cmd_inversion(const CliOptions& opt) {
    const SteadyState ss = steady_state(opt.params, opt.numerics);
    const RatePair r = detection_rates(ss);
    const InversionPair inv = atomic_inversion(ss);
    const char* unit =
        opt.params.time_unit == TimeUnit::cavity_decay ? "gamma" : "r";
    std::printf("I         %.12g\n", inv.per_injected);
    std::printf("Itilde    %.12g\n", inv.per_detected);
    std::printf("r_A       %.12g  [per 1/%s]\n", r.rate_a(), unit);
    std::printf("r_B       %.12g  [per 1/%s]\n", r.rate_b(), unit);
    std::printf("P[A]      %.12g\n", r.p_a());
    std::printf("P[B]      %.12g\n", r.p_b());
    return 0;
}

int cmd_fano(const CliOptions& opt, const std::string& channel, double time,
             bool infinite) {
    if (channel != "A" && channel != "B")
        throw InvalidParams("--channel must be A or B");
    const Channel ch = channel == "A" ? Channel::A : Channel::B;
    const double eta = ch == Channel::A ? opt.params.eta_a : opt.params.eta_b;
    const SteadyState ss = steady_state(opt.params, opt.numerics);
    const double q = fano_mandel(ch, infinite ? kInf : time, ss, opt.numerics);
    if (infinite)
        std::printf("Q_%s(inf)    %.12g\n", channel.c_str(), q);
    else
        std::printf("Q_%s(t=%g)   %.12g\n", channel.c_str(), time, q);
    if (eta > 0.0)
        std::printf("Q_%s/eta     %.12g\n", channel.c_str(), q / eta);
    return 0;
}

int cmd_runs(const CliOptions& opt) {
    const SteadyState ss = steady_state(opt.params, opt.numerics);
    const SuccessiveRuns runs =
        mean_successive(ss, opt.trace_method(), opt.numerics);
    std::printf("gamma          %.12g  (ordering spread %.3g)\n",
                runs.gamma.value, runs.gamma.ordering_diff);
    print_report_table({runs.n_a, runs.n_b, runs.n_mean});
    return 0;
}

int cmd_waiting(const CliOptions& opt) {
    const SteadyState ss = steady_state(opt.params, opt.numerics);
    const auto reports = waiting_times(ss, opt.trace_method(), opt.numerics);
    const char* unit =
        opt.params.time_unit == TimeUnit::cavity_decay ? "1/gamma" : "1/r";
    std::printf("times in units of %s\n", unit);
    print_report_table(reports);
    return 0;
}

int cmd_sequence(const CliOptions& opt, std::vector<std::string> seqs,
                 int length) {
    const SteadyState ss = steady_state(opt.params, opt.numerics);
    if (length > 0) {
        if (length > opt.numerics.max_sequence_length)
            throw InvalidParams("--length exceeds the configured maximum");
        seqs.clear();
        for (int bits = 0; bits < (1 << length); ++bits) {
            std::string word;
            for (int k = length - 1; k >= 0; --k)
                word.push_back(bits & (1 << k) ? 'B' : 'A');
            seqs.push_back(word);
        }
    }
    if (seqs.empty()) throw InvalidParams("give --seq or --length");

    double total = 0.0;
    for (const std::string& seq : seqs) {
        const SequenceProb sp =
            sequence_probability(seq, ss, opt.trace_method(), opt.numerics);
        total += sp.value;
        std::printf("P[%s] %.12g\n", sp.sequence.c_str(), sp.value);
    }
    if (length > 0) std::printf("total %.12g\n", total);
    return 0;
}

int cmd_sweep(const CliOptions& opt, const SweepSpec& spec,
              const std::string& trap_marks_path) {
    const SweepResult res = run_sweep(spec);
    if (!trap_marks_path.empty()) {
        std::ostringstream marks;
        marks << "n0,q,phi";
        const bool tint_axis = spec.axis == SweepAxis::t_int;
        if (tint_axis) marks << ",tint_us";
        marks << '\n';
        for (const TrappingAngle& ta : res.markers) {
            marks << ta.n0 << ',' << ta.q << ',' << format_csv_number(ta.phi);
            if (tint_axis)
                marks << ','
                      << format_csv_number(ta.phi / (spec.coupling_g_khz * 1e-3));
            marks << '\n';
        }
        if (write_or_print(trap_marks_path, marks.str()) != 0) return 1;
    }
    return write_or_print(opt.out_path, res.csv);
}

} // namespace

} // namespace maser_cli

int main(int argc, char** argv) {
    using namespace maser_cli;
    using namespace micromaser;

    CLI::App app{"micromaser detection statistics"};
    app.fallthrough(true);
    app.set_config("--config", "", "flat key=value configuration file");

    CliOptions opt;
    app.add_option("--nex", opt.params.n_ex, "atoms per cavity lifetime, r/gamma");
    app.add_option("--nu", opt.params.nu, "mean thermal photon number");
    auto* phi_opt =
        app.add_option("--phi", opt.params.phi, "accumulated Rabi angle [rad]");
    auto* tint_opt =
        app.add_option("--tint", opt.tint_us, "interaction time [us]; phi = g*tint");
    app.add_option("--g-khz", opt.g_khz, "atom-field coupling [kHz]");
    app.add_option("--eta-a", opt.params.eta_a, "excited-state detector efficiency");
    app.add_option("--eta-b", opt.params.eta_b, "de-excited detector efficiency");
    auto* eta_opt =
        app.add_option("--eta", opt.eta_both, "sets both detector efficiencies");
    app.add_option("--time-unit", opt.time_unit, "gamma | r")
        ->capture_default_str();
    app.add_option("--method", opt.method, "time | direct | both")
        ->capture_default_str();
    app.add_option("--nmax-cap", opt.numerics.nmax_cap, "photon truncation cap");
    app.add_option("--tol", opt.tol, "integrator relative tolerance");
    app.add_option("--trace-tol", opt.numerics.trace_rtol,
                   "improper integral tolerance");
    app.add_option("--fixed-dt", opt.numerics.fixed_dt,
                   "fixed integrator step (0 = adaptive)");
    app.add_option("--seed", opt.seed, "random seed");
    app.add_option("--sigma-tint-us", opt.sigma_tint_us,
                   "Gaussian interaction-time spread [us]");
    app.add_option("--threads", opt.threads, "sweep worker threads (0 = auto)");
    app.add_option("--burn-in-atoms", opt.numerics.mc_burn_in_atoms,
                   "record burn-in atoms (0 = auto)");
    app.add_option("--out", opt.out_path, "output CSV path");
    app.add_flag("--dump-config", opt.dump_config,
                 "print the effective configuration and exit");

    auto* steady = app.add_subcommand("steady", "stationary photon distribution");
    auto* inversion = app.add_subcommand("inversion", "atomic inversion and rates");

    auto* fano = app.add_subcommand("fano", "counting fluctuation function");
    std::string fano_channel = "B";
    double fano_time = 1.0;
    fano->add_option("--channel", fano_channel, "A | B")->capture_default_str();
    auto* fano_time_opt =
        fano->add_option("--time", fano_time, "observation window (reported unit)");

    auto* runs = app.add_subcommand("runs", "mean successive detections");
    auto* waiting = app.add_subcommand("waiting", "mean waiting times");

    auto* sequence =
        app.add_subcommand("sequence", "detection sequence probabilities");
    std::vector<std::string> seq_args;
    int seq_length = 0;
    sequence->add_option("--seq", seq_args, "sequence over {A,B}; repeatable");
    sequence->add_option("--length", seq_length, "evaluate all words of this length");

    auto* sweep = app.add_subcommand("sweep", "observable sweep to CSV");
    SweepSpec spec;
    std::string axis = "phi";
    std::string observables = "I";
    std::string trap_marks;
    sweep->add_option("--axis", axis, "phi | tint")->capture_default_str();
    sweep->add_option("--start", spec.start, "grid start")->required();
    sweep->add_option("--stop", spec.stop, "grid stop")->required();
    sweep->add_option("--points", spec.points, "grid points")->required();
    sweep->add_option("--observables", observables, "comma-separated names");
    sweep->add_option("--gauss-points", spec.gauss_points,
                      "quadrature nodes for t_int averaging");
    sweep->add_option("--trap-marks", trap_marks,
                      "write trapping-angle markers to this CSV");
    sweep->add_option("--trap-n0-max", spec.trap_n0_max,
                      "annotate trapping angles up to this n0");

    auto* mc = app.add_subcommand("mc-verify", "record estimates vs analytic values");
    long mc_atoms = 1000000;
    std::string mc_dump;
    mc->add_option("--atoms", mc_atoms, "simulated atom passages")
        ->capture_default_str();
    mc->add_option("--dump-record", mc_dump,
                   "write the event record ('time outcome' per line) here");

    auto* verify = app.add_subcommand("verify", "identity and oracle suite");
    long verify_atoms = 300000;
    bool skip_mc = false;
    bool fault_inject = false;
    verify->add_option("--atoms", verify_atoms, "record budget for the MC block")
        ->capture_default_str();
    verify->add_flag("--skip-mc", skip_mc, "skip the record comparison");
    verify->add_flag("--fault-inject", fault_inject,
                     "perturb the stationary state; the residual check must fail");

    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        opt.resolve(tint_opt->count() > 0, phi_opt->count() > 0,
                    eta_opt->count() > 0);

        if (opt.dump_config) {
            std::fputs(opt.config_text().c_str(), stdout);
            return 0;
        }

        if (steady->parsed()) return cmd_steady(opt);
        if (inversion->parsed()) return cmd_inversion(opt);
        if (fano->parsed())
            return cmd_fano(opt, fano_channel, fano_time,
                            fano_time_opt->count() == 0);
        if (runs->parsed()) return cmd_runs(opt);
        if (waiting->parsed()) return cmd_waiting(opt);
        if (sequence->parsed()) return cmd_sequence(opt, seq_args, seq_length);
        if (sweep->parsed()) {
            if (axis == "phi")
                spec.axis = SweepAxis::phi;
            else if (axis == "tint")
                spec.axis = SweepAxis::t_int;
            else
                throw InvalidParams("--axis must be phi or tint");
            spec.params = opt.params;
            spec.numerics = opt.numerics;
            spec.method = opt.trace_method();
            spec.threads = opt.threads;
            spec.coupling_g_khz = opt.g_khz;
            spec.t_int_sigma_us = opt.sigma_tint_us;
            spec.observables.clear();
            std::istringstream split(observables);
            std::string name;
            while (std::getline(split, name, ','))
                if (!name.empty()) spec.observables.push_back(name);
            return cmd_sweep(opt, spec, trap_marks);
        }
        if (mc->parsed()) return run_mc_verify(opt, mc_atoms, mc_dump);
        if (verify->parsed())
            return run_verify(opt, verify_atoms, skip_mc, fault_inject);

        std::fputs(app.help().c_str(), stdout);
        return 0;
    } catch (const InvalidParams& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
