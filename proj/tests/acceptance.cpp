// Acceptance suite: one line per criterion, nonzero exit on any failure.
// argv[1] (optional) is the CLI binary, used by the determinism criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <micromaser/errors.hpp>
#include <micromaser/rng.hpp>
#include <micromaser/statistics.hpp>
#include <micromaser/sweep.hpp>
#include <micromaser/trajectory.hpp>

using namespace micromaser;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("%s criterion-%-2d %-28s %s\n", ok ? "PASS" : "FAIL", idx, name,
                detail.c_str());
    std::fflush(stdout);
}

MaserParams base_params(double eta, double phi) {
    MaserParams p;
    p.n_ex = 7.0;
    p.nu = 0.054;
    p.phi = phi;
    p.eta_a = eta;
    p.eta_b = eta;
    p.time_unit = TimeUnit::atom_injection;
    return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

// -- criterion 1: stationary-state certification --------------------------

void criterion_steady() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    int points = 0;
    for (double n_ex : {7.0, 10.0}) {
        for (int i = 0; i < 200; ++i) {
            MaserParams p = base_params(1.0, 0.1 + (10.0 - 0.1) * i / 199.0);
            p.n_ex = n_ex;
            const SteadyState ss = steady_state(p);
            worst = std::max(worst, ss.residual);
            ++points;
        }
    }
    const double elapsed = seconds_since(t0);
    const bool ok = worst < 1e-10 && elapsed < 5.0;
    report(1, "steady-state residuals", ok,
           fmt("max ||X rho_ss||_1 = %.3e over %d points (%.2f s)", worst,
               points, elapsed));
}

// -- criterion 2: waiting-time identity through the full pipeline ---------

void criterion_waiting_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    const NumericsConfig cfg;
    for (double eta : {1.0, 0.4, 0.1}) {
        for (int i = 0; i < 50; ++i) {
            const MaserParams p = base_params(eta, 0.1 + (10.0 - 0.1) * i / 49.0);
            const SteadyState ss = steady_state(p, cfg);
            const RatePair r = detection_rates(ss);

            TraceQuery q;
            q.method = TraceMethod::time_integration;
            q.resolvent_power = 2;

            q.left = TraceQuery::LeftOp::jump_A;
            q.resolvent_channel = {Channel::A, p};
            q.seed = apply_jump({Channel::A, p}, ss.dist);
            const double taa_ra = resolvent_trace(q, cfg);

            q.left = TraceQuery::LeftOp::jump_B;
            q.resolvent_channel = {Channel::B, p};
            q.seed = apply_jump({Channel::B, p}, ss.dist);
            const double tbb_rb = resolvent_trace(q, cfg);

            worst = std::max({worst, std::abs(taa_ra - 1.0),
                              std::abs(tbb_rb - 1.0)});
            (void)r;
        }
    }
    report(2, "waiting-time identity", worst < 1e-8,
           fmt("max |<t>*rate - 1| = %.3e over 150 points (%.1f s)", worst,
               seconds_since(t0)));
}

// -- criterion 3: time integration vs direct solve ------------------------

void criterion_oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    Xoshiro256PlusPlus rng(20260808);
    const NumericsConfig cfg;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        MaserParams p = base_params(1.0, 0.1 + 9.9 * rng.uniform());
        p.eta_a = 0.05 + 0.95 * rng.uniform();
        p.eta_b = 0.05 + 0.95 * rng.uniform();
        const SteadyState ss = steady_state(p, cfg);

        TraceQuery q;
        const Channel channels[3] = {Channel::A, Channel::B, Channel::AB};
        q.resolvent_channel = {channels[rng.next() % 3], p};
        q.resolvent_power = 1 + static_cast<int>(rng.next() % 3);
        const TraceQuery::LeftOp lefts[4] = {
            TraceQuery::LeftOp::jump_A, TraceQuery::LeftOp::jump_B,
            TraceQuery::LeftOp::jump_AB, TraceQuery::LeftOp::identity_trace};
        q.left = lefts[rng.next() % 4];
        q.seed = rng.next() % 2 ? ss.dist
                                : apply_jump({channels[rng.next() % 3], p}, ss.dist);

        q.method = TraceMethod::time_integration;
        const double ti = resolvent_trace(q, cfg);
        q.method = TraceMethod::direct_solve;
        const double ds = resolvent_trace(q, cfg);
        worst = std::max(worst, std::abs(ti - ds) /
                                    std::max({std::abs(ti), std::abs(ds), 1e-12}));
    }
    report(3, "oracle equivalence", worst < 1e-7,
           fmt("max relative gap = %.3e over 50 queries (%.1f s)", worst,
               seconds_since(t0)));
}

// -- criterion 4: Monte-Carlo agreement -----------------------------------

void criterion_mc_agreement() {
    const auto t0 = std::chrono::steady_clock::now();
    const NumericsConfig cfg;
    const double pi = std::acos(-1.0);
    double worst_z = 0.0;
    std::string worst_tag = "none";
    long atoms = 1000000;

    std::uint64_t seed = 6021023;
    for (double phi : {1.0, pi / std::sqrt(2.0)}) {
        const MaserParams p = base_params(0.4, phi);
        const SteadyState ss = steady_state(p, cfg);
        const RatePair r = detection_rates(ss);
        const SuccessiveRuns runs = mean_successive(ss, TraceMethod::direct_solve, cfg);
        const auto waits = waiting_times(ss, TraceMethod::direct_solve, cfg);
        const double qb = fano_mandel(Channel::B, p.n_ex, ss, cfg);
        const DetectionRecord rec = simulate(p, atoms, seed++, cfg);

        const std::vector<std::pair<std::string, double>> targets = {
            {"P[A]", r.p_a()},
            {"n_A", runs.n_a.value},
            {"n_B", runs.n_b.value},
            {"t_AB", waits[4].value},
            {"t_BA", waits[5].value},
            {"I", atomic_inversion(ss).per_injected},
            {"Q_B@" + format_csv_number(p.n_ex), qb},
        };
        for (const auto& [name, analytic] : targets) {
            const Estimate e = estimate(rec, name);
            const double z = std::abs(e.value - analytic) / e.std_error;
            if (z > worst_z) {
                worst_z = z;
                worst_tag = name + fmt("@phi=%.4g", phi);
            }
        }
    }
    const double elapsed = seconds_since(t0);
    const bool ok = worst_z <= 3.0 && elapsed < 60.0;
    report(4, "Monte-Carlo agreement", ok,
           fmt("worst |z| = %.2f (%s), 2 x %ld atoms (%.1f s)", worst_z,
               worst_tag.c_str(), atoms, elapsed));
}

// -- criterion 5: sequence algebra ----------------------------------------

void criterion_sequence_algebra() {
    const auto t0 = std::chrono::steady_clock::now();
    const NumericsConfig cfg;
    const MaserParams p = base_params(0.4, 1.0);
    const SteadyState ss = steady_state(p, cfg);
    const TraceMethod m = TraceMethod::time_integration;

    auto prob = [&](const std::string& word) {
        return sequence_probability(word, ss, m, cfg).value;
    };
    auto words_of = [](int len) {
        std::vector<std::string> out;
        for (int bits = 0; bits < (1 << len); ++bits) {
            std::string word;
            for (int k = len - 1; k >= 0; --k)
                word.push_back(bits & (1 << k) ? 'B' : 'A');
            out.push_back(word);
        }
        return out;
    };

    double worst_sum = 0.0;
    double worst_distributive = 0.0;
    for (int len = 1; len <= 4; ++len) {
        double total = 0.0;
        for (const std::string& word : words_of(len)) total += prob(word);
        worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    }
    for (int len = 1; len <= 3; ++len)
        for (const std::string& prefix : words_of(len))
            worst_distributive = std::max(
                worst_distributive,
                std::abs(prob(prefix + "A") + prob(prefix + "B") - prob(prefix)));
    const double swap_gap = std::abs(prob("AB") - prob("BA"));

    const bool ok =
        worst_sum < 1e-8 && worst_distributive < 1e-8 && swap_gap < 1e-9;
    report(5, "sequence algebra", ok,
           fmt("sum gap %.2e, distributive gap %.2e, P[AB]-P[BA] %.2e (%.1f s)",
               worst_sum, worst_distributive, swap_gap, seconds_since(t0)));
}

// -- criterion 6: efficiency-scaling invariances ---------------------------

void criterion_scaling() {
    const NumericsConfig cfg;
    double worst_q = 0.0;
    for (Channel ch : {Channel::A, Channel::B}) {
        const double q_full =
            fano_mandel(ch, kInf, steady_state(base_params(1.0, 1.0), cfg), cfg);
        const double q_dim =
            fano_mandel(ch, kInf, steady_state(base_params(0.4, 1.0), cfg), cfg);
        worst_q = std::max(worst_q, std::abs(q_full / 1.0 - q_dim / 0.4));
    }
    const double it_full =
        atomic_inversion(base_params(1.0, 1.0), cfg).per_detected;
    const double it_dim =
        atomic_inversion(base_params(0.4, 1.0), cfg).per_detected;
    const double it_gap = std::abs(it_full - it_dim);

    const bool ok = worst_q < 1e-8 && it_gap < 1e-12;
    report(6, "efficiency scaling", ok,
           fmt("Q/eta gap %.2e, detected-inversion gap %.2e", worst_q, it_gap));
}

// -- criterion 7: decorrelation with dim detectors -------------------------

void criterion_decorrelation() {
    const NumericsConfig cfg;
    bool ok = true;
    std::string detail;
    for (double phi : {1.0, 3.0}) {
        const SteadyState bright = steady_state(base_params(0.4, phi), cfg);
        const SteadyState dim = steady_state(base_params(0.01, phi), cfg);
        const double n_far = std::abs(
            mean_successive(bright, TraceMethod::time_integration, cfg)
                .n_mean.normalized - 1.0);
        const double n_near = std::abs(
            mean_successive(dim, TraceMethod::time_integration, cfg)
                .n_mean.normalized - 1.0);
        const double t_far =
            std::abs(waiting_times(bright, TraceMethod::time_integration, cfg)[4]
                         .normalized - 1.0);
        const double t_near =
            std::abs(waiting_times(dim, TraceMethod::time_integration, cfg)[4]
                         .normalized - 1.0);
        ok = ok && n_near < n_far && t_near < t_far;
        detail += fmt("phi=%g: |n-1| %.1e<%.1e, |t-1| %.1e<%.1e  ", phi, n_near,
                      n_far, t_near, t_far);
    }
    report(7, "decorrelation limit", ok, detail);
}

// -- criterion 8: trapping-state structure ---------------------------------

void criterion_trapping_structure() {
    const auto t0 = std::chrono::steady_clock::now();
    const NumericsConfig cfg;
    const double pi = std::acos(-1.0);
    bool ok = true;
    std::string detail;

    for (double center : {pi / std::sqrt(2.0), pi}) {
        double na_best = -1e300, na_at = 0.0;
        double nb_best = 1e300, nb_at = 0.0;
        double tab_best = -1e300, tab_at = 0.0;
        double tba_best = 1e300, tba_at = 0.0;
        for (int i = -20; i <= 20; ++i) {
            const double phi = center + 0.01 * i;
            const SteadyState ss = steady_state(base_params(1.0, phi), cfg);
            const SuccessiveRuns runs =
                mean_successive(ss, TraceMethod::direct_solve, cfg);
            const auto waits = waiting_times(ss, TraceMethod::direct_solve, cfg);
            if (runs.n_a.value > na_best) { na_best = runs.n_a.value; na_at = phi; }
            if (runs.n_b.value < nb_best) { nb_best = runs.n_b.value; nb_at = phi; }
            if (waits[4].value > tab_best) { tab_best = waits[4].value; tab_at = phi; }
            if (waits[5].value < tba_best) { tba_best = waits[5].value; tba_at = phi; }
        }
        const double worst_offset =
            std::max({std::abs(na_at - center), std::abs(nb_at - center),
                      std::abs(tab_at - center), std::abs(tba_at - center)});
        ok = ok && worst_offset <= 0.05;
        detail += fmt("phi*=%.4f: extrema within %.3f rad  ", center, worst_offset);
    }
    report(8, "trapping-state structure", ok,
           detail + fmt("(%.1f s)", seconds_since(t0)));
}

// -- criterion 9: second-moment correlation --------------------------------

void criterion_second_moment() {
    const NumericsConfig cfg;
    const MaserParams p = base_params(1.0, 1.0);
    const SteadyState ss = steady_state(p, cfg);
    const RatePair r = detection_rates(ss);
    const auto waits = waiting_times(ss, TraceMethod::time_integration, cfg);
    const double ratio =
        waits[2].value * r.rate_a() * r.rate_a() / 2.0;  // t2_AA vs 2/r_A^2

    const DetectionRecord rec = simulate(p, 1000000, 424242, cfg);
    const Estimate e = estimate(rec, "t2_AA");
    const double z = std::abs(e.value - waits[2].value) / e.std_error;

    const bool ok = std::abs(ratio - 1.0) > 1e-3 && z <= 3.0;
    report(9, "second-moment correlation", ok,
           fmt("t2*r^2/2 = %.6f (|dev| %.2e > 1e-3), MC z = %.2f", ratio,
               std::abs(ratio - 1.0), z));
}

// -- criterion 10: deterministic sweeps ------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism(const char* cli_path) {
    SweepSpec spec;
    spec.axis = SweepAxis::phi;
    spec.start = 0.4;
    spec.stop = 3.2;
    spec.points = 8;
    spec.observables = {"I", "nnorm", "tab_norm", "qb_inf_scaled"};
    spec.params = base_params(0.4, 1.0);
    spec.numerics.fixed_dt = 0.05;
    spec.method = TraceMethod::time_integration;

    spec.threads = 1;
    const std::string run_a = run_sweep(spec).csv;
    const std::string run_b = run_sweep(spec).csv;
    spec.threads = 4;
    const std::string run_c = run_sweep(spec).csv;
    bool ok = run_a == run_b && run_a == run_c;
    std::string detail = "library rows identical across reruns and 1/4 workers";

    if (cli_path != nullptr) {
        const std::string common =
            std::string("\"") + cli_path +
            "\" sweep --axis phi --start 0.4 --stop 3.2 --points 8"
            " --observables I,nnorm,tab_norm --nex 7 --nu 0.054 --eta 0.4"
            " --fixed-dt 0.05 ";
        const int rc1 =
            std::system((common + "--threads 1 --out acc_sweep_1.csv").c_str());
        const int rc2 =
            std::system((common + "--threads 3 --out acc_sweep_2.csv").c_str());
        const std::string f1 = read_file("acc_sweep_1.csv");
        const std::string f2 = read_file("acc_sweep_2.csv");
        const bool cli_ok = rc1 == 0 && rc2 == 0 && !f1.empty() && f1 == f2;
        ok = ok && cli_ok;
        detail += cli_ok ? "; CLI files byte-identical"
                         : "; CLI files differ or run failed";
        std::remove("acc_sweep_1.csv");
        std::remove("acc_sweep_2.csv");
    } else {
        detail += "; CLI binary not supplied, library check only";
    }
    report(10, "deterministic sweeps", ok, detail);
}

} // namespace

int main(int argc, char** argv) {
    const char* cli_path = argc > 1 ? argv[1] : nullptr;
    try {
        criterion_steady();
        criterion_waiting_identity();
        criterion_oracle_equivalence();
        criterion_mc_agreement();
        criterion_sequence_algebra();
        criterion_scaling();
        criterion_decorrelation();
        criterion_trapping_structure();
        criterion_second_moment();
        criterion_determinism(cli_path);
    } catch (const std::exception& e) {
        std::printf("FAIL unexpected exception: %s\n", e.what());
        ++failures;
    }
    std::printf("acceptance: %d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
