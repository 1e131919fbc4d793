#include <cmath>
#include <fstream>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <micromaser/errors.hpp>
#include <micromaser/rng.hpp>
#include <micromaser/statistics.hpp>
#include <micromaser/trajectory.hpp>

#include "common.hpp"

namespace maser_cli {

using namespace micromaser;

namespace {

struct Suite {
    int failures = 0;
    int ran = 0;
    int skipped = 0;

    void pass(const std::string& name, const std::string& detail) {
        ++ran;
        std::printf("PASS %-26s %s\n", name.c_str(), detail.c_str());
    }
    void fail(const std::string& name, const std::string& detail) {
        ++ran;
        ++failures;
        std::printf("FAIL %-26s %s\n", name.c_str(), detail.c_str());
    }
    void skip(const std::string& name, const std::string& why) {
        ++skipped;
        std::printf("SKIP %-26s %s\n", name.c_str(), why.c_str());
    }
    void check(const std::string& name, double measured, double bound) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "measured=%.3e bound=%.3e", measured,
                      bound);
        if (measured <= bound)
            pass(name, buf);
        else
            fail(name, buf);
    }
};

PhotonDistribution random_state(int n_max, Xoshiro256PlusPlus& rng) {
    PhotonDistribution p = PhotonDistribution::zeros(n_max);
    for (int n = 0; n + 4 <= n_max; ++n) p.weights[n] = rng.uniform();
    p.normalize();
    return p;
}

double z_or_inf(const Estimate& e, double analytic) {
    if (e.std_error <= 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(e.value - analytic) / e.std_error;
}

} // namespace

int run_mc_verify(const CliOptions& opt, long mc_atoms,
                  const std::string& dump_path) {
    MaserParams params = opt.params;
    params.time_unit = TimeUnit::atom_injection;  // records live in tau
    const NumericsConfig& cfg = opt.numerics;

    const SteadyState ss = steady_state(params, cfg);
    const RatePair rates = detection_rates(ss);
    if (rates.frac_a + rates.frac_b <= 0.0) {
        std::printf("SKIP mc-verify: both detector channels are closed\n");
        return 0;
    }

    std::printf("simulating %ld atoms, seed %llu\n", mc_atoms,
                static_cast<unsigned long long>(opt.seed));
    const DetectionRecord rec = simulate(params, mc_atoms, opt.seed, cfg);
    std::printf("detections: A=%ld B=%ld undetected=%ld duration=%.4g\n",
                rec.detected_a, rec.detected_b,
                rec.n_atoms - rec.detected_a - rec.detected_b, rec.duration);
    if (!dump_path.empty()) {
        std::ofstream dump(dump_path, std::ios::binary);
        if (!dump) {
            std::fprintf(stderr, "cannot open %s for writing\n", dump_path.c_str());
            return 1;
        }
        dump_record(rec, dump);
        std::printf("record written to %s\n", dump_path.c_str());
    }

    struct Line {
        std::string name;
        double analytic;
        bool enabled = true;
    };
    std::vector<Line> lines;
    lines.push_back({"P[A]", 0.0, false});
    lines.push_back({"P[B]", 0.0, false});
    lines.push_back({"I", atomic_inversion(ss).per_injected});
    lines.push_back({"Itilde", atomic_inversion(ss).per_detected});

    try {
        lines[0] = {"P[A]", rates.p_a()};
        lines[1] = {"P[B]", rates.p_b()};
    } catch (const DegenerateChannel&) {
    }

    const bool both_open = rates.frac_a > 0.0 && rates.frac_b > 0.0;
    if (both_open) {
        const SuccessiveRuns runs =
            mean_successive(ss, TraceMethod::direct_solve, cfg);
        const auto waits = waiting_times(ss, TraceMethod::direct_solve, cfg);
        lines.push_back({"n_A", runs.n_a.value});
        lines.push_back({"n_B", runs.n_b.value});
        lines.push_back({"t_AA", waits[0].value});
        lines.push_back({"t_BB", waits[1].value});
        lines.push_back({"t2_AA", waits[2].value});
        lines.push_back({"t_AB", waits[4].value});
        lines.push_back({"t_BA", waits[5].value});
        char qname[32];
        std::snprintf(qname, sizeof qname, "Q_B@%.12g", params.n_ex);
        lines.push_back({qname, fano_mandel(Channel::B, params.n_ex, ss, cfg)});
    }

    int failures = 0;
    std::printf("%-10s %13s %13s %10s %7s\n", "observable", "estimate",
                "analytic", "std.err", "z");
    for (const Line& line : lines) {
        if (!line.enabled) {
            std::printf("%-10s %13s\n", line.name.c_str(), "degenerate");
            continue;
        }
        try {
            const Estimate e = estimate(rec, line.name);
            const double z = z_or_inf(e, line.analytic);
            const bool ok = z <= 3.0;
            if (!ok) ++failures;
            std::printf("%-10s %13.6g %13.6g %10.3g %+7.2f %s\n",
                        line.name.c_str(), e.value, line.analytic, e.std_error,
                        (e.value - line.analytic) / e.std_error,
                        ok ? "" : "FAIL");
        } catch (const InsufficientData& e) {
            std::printf("%-10s %13s (%s)\n", line.name.c_str(), "starved",
                        e.what());
        }
    }
    if (failures > 0) {
        std::printf("mc-verify: %d observable(s) outside 3 sigma\n", failures);
        return 1;
    }
    std::printf("mc-verify: all observables within 3 sigma\n");
    return 0;
}

int run_verify(const CliOptions& opt, long mc_atoms, bool skip_mc,
               bool fault_inject) {
    const MaserParams params = opt.params;
    const NumericsConfig& cfg = opt.numerics;
    const TraceMethod method = opt.trace_method();
    Suite suite;

    SteadyState ss = steady_state(params, cfg);
    if (fault_inject) {
        // Negative control: a perturbed stationary state must trip the
        // residual certificate.
        ss.dist.weights[std::min(3, ss.dist.n_max())] += 1e-6;
        ss.residual = apply_generator(ss.dist, params).l1_norm();
    }
    suite.check("steady_residual", ss.residual, cfg.steady_residual_tol);

    {
        MaserParams thermal = params;
        thermal.phi = 0.0;
        const SteadyState th = steady_state(thermal, cfg);
        const double ratio = thermal.nu / (thermal.nu + 1.0);
        double expect = 1.0 - ratio;
        double worst = 0.0;
        for (int n = 0; n <= th.dist.n_max(); ++n) {
            worst = std::max(worst, std::abs(th.dist.weights[n] - expect));
            expect *= ratio;
        }
        suite.check("thermal_limit", worst, 1e-13);
    }

    {
        Xoshiro256PlusPlus rng(opt.seed);
        double worst_l = 0.0, worst_m = 0.0, worst_x = 0.0, worst_split = 0.0;
        for (int trial = 0; trial < 16; ++trial) {
            const PhotonDistribution s = random_state(ss.dist.n_max(), rng);
            worst_l = std::max(worst_l, std::abs(apply_damping(s, params).sum()));
            worst_m = std::max(worst_m,
                               std::abs(apply_pass_excited(s, params).sum() +
                                        apply_pass_deexcited(s, params).sum() -
                                        s.sum()));
            const PhotonDistribution x = apply_generator(s, params);
            worst_x = std::max(worst_x, std::abs(x.sum()));
            for (Channel ch : {Channel::A, Channel::B, Channel::AB}) {
                const ChannelSplit split{ch, params};
                const PhotonDistribution jump = apply_jump(split, s);
                const PhotonDistribution rest = apply_no_detection(split, s);
                for (int n = 0; n <= s.n_max(); ++n)
                    worst_split = std::max(
                        worst_split, std::abs(jump.weights[n] + rest.weights[n] -
                                              x.weights[n]));
            }
        }
        suite.check("trace_damping", worst_l, 1e-12);
        suite.check("trace_passage", worst_m, 1e-12);
        suite.check("trace_generator", worst_x, 1e-12);
        suite.check("splitting", worst_split, 1e-13);
    }

    {
        Xoshiro256PlusPlus rng(opt.seed + 1);
        const PhotonDistribution s = random_state(ss.dist.n_max(), rng);
        const auto mv = generator_matrix(params, s.n_max()).apply(s.weights);
        const PhotonDistribution free = apply_generator(s, params);
        double worst = 0.0;
        for (int n = 0; n <= s.n_max(); ++n)
            worst = std::max(worst, std::abs(mv[n] - free.weights[n]));
        suite.check("matrix_agreement", worst, 1e-14);
    }

    const RatePair rates = detection_rates(ss);
    const bool both_open = rates.frac_a > 0.0 && rates.frac_b > 0.0;

    if (!both_open) {
        suite.skip("waiting_identity", "degenerate: a channel never fires");
        suite.skip("gamma_symmetry", "degenerate: a channel never fires");
        suite.skip("sequence_algebra", "degenerate: a channel never fires");
        suite.skip("run_normalization", "degenerate: a channel never fires");
        suite.skip("q_scaling", "degenerate: a channel never fires");
        suite.skip("itilde_invariance", "degenerate: a channel never fires");
        suite.skip("decorrelation", "degenerate: a channel never fires");
    } else {
        {
            const auto waits = waiting_times(ss, method, cfg);
            const double worst =
                std::max(std::abs(waits[0].value * rates.rate_a() - 1.0),
                         std::abs(waits[1].value * rates.rate_b() - 1.0));
            suite.check("waiting_identity", worst, 1e-8);
        }
        {
            const GammaResult g = gamma_switch(ss, method, cfg);
            suite.check("gamma_symmetry", g.ordering_diff, 1e-9);
        }
        {
            double worst_sum = 0.0;
            for (int len = 1; len <= 3; ++len) {
                double total = 0.0;
                for (int bits = 0; bits < (1 << len); ++bits) {
                    std::string word;
                    for (int k = len - 1; k >= 0; --k)
                        word.push_back(bits & (1 << k) ? 'B' : 'A');
                    total += sequence_probability(word, ss, method, cfg).value;
                }
                worst_sum = std::max(worst_sum, std::abs(total - 1.0));
            }
            const double p_ab = sequence_probability("AB", ss, method, cfg).value;
            const double p_ba = sequence_probability("BA", ss, method, cfg).value;
            const double p_a = sequence_probability("A", ss, method, cfg).value;
            const double p_aa = sequence_probability("AA", ss, method, cfg).value;
            const double distributive = std::abs(p_aa + p_ab - p_a);
            suite.check("sequence_algebra",
                        std::max({worst_sum, distributive,
                                  std::abs(p_ab - p_ba)}),
                        1e-8);
        }
        {
            const SuccessiveRuns runs = mean_successive(ss, method, cfg);
            const double spread =
                std::max(std::abs(runs.n_a.normalized - runs.n_mean.normalized),
                         std::abs(runs.n_b.normalized - runs.n_mean.normalized));
            suite.check("run_normalization", spread, 1e-9);
        }
        {
            MaserParams full = params;
            full.eta_a = full.eta_b = 1.0;
            MaserParams dim = params;
            dim.eta_a = dim.eta_b = 0.4;
            const double qb_full =
                fano_mandel(Channel::B, std::numeric_limits<double>::infinity(),
                            steady_state(full, cfg), cfg);
            const double qb_dim =
                fano_mandel(Channel::B, std::numeric_limits<double>::infinity(),
                            steady_state(dim, cfg), cfg);
            suite.check("q_scaling", std::abs(qb_full / 1.0 - qb_dim / 0.4),
                        1e-8 * std::max(1.0, std::abs(qb_full)));

            const double itilde_full = atomic_inversion(full, cfg).per_detected;
            const double itilde_dim = atomic_inversion(dim, cfg).per_detected;
            suite.check("itilde_invariance",
                        std::abs(itilde_full - itilde_dim), 1e-12);
        }
        {
            MaserParams dim = params;
            dim.eta_a = dim.eta_b = 0.01;
            MaserParams bright = params;
            bright.eta_a = bright.eta_b = std::max({params.eta_a, params.eta_b, 0.4});
            const double near =
                std::abs(mean_successive(steady_state(dim, cfg), method, cfg)
                             .n_mean.normalized -
                         1.0);
            const double far =
                std::abs(mean_successive(steady_state(bright, cfg), method, cfg)
                             .n_mean.normalized -
                         1.0);
            if (near < far)
                suite.pass("decorrelation",
                           "normalized run mean closer to 1 at eta=0.01");
            else
                suite.fail("decorrelation", "no decorrelation with dim detectors");
        }
    }

    {
        Xoshiro256PlusPlus rng(opt.seed + 2);
        double worst = 0.0;
        for (int trial = 0; trial < 12; ++trial) {
            MaserParams p = params;
            p.phi = 0.1 + 9.9 * rng.uniform();
            p.eta_a = 0.05 + 0.95 * rng.uniform();
            p.eta_b = 0.05 + 0.95 * rng.uniform();
            const SteadyState s = steady_state(p, cfg);
            TraceQuery q;
            const Channel channels[3] = {Channel::A, Channel::B, Channel::AB};
            q.resolvent_channel = {channels[rng.next() % 3], p};
            q.resolvent_power = 1 + static_cast<int>(rng.next() % 3);
            const TraceQuery::LeftOp lefts[4] = {
                TraceQuery::LeftOp::jump_A, TraceQuery::LeftOp::jump_B,
                TraceQuery::LeftOp::jump_AB, TraceQuery::LeftOp::identity_trace};
            q.left = lefts[rng.next() % 4];
            q.seed = rng.next() % 2
                         ? s.dist
                         : apply_jump({channels[rng.next() % 3], p}, s.dist);
            q.method = TraceMethod::time_integration;
            const double ti = resolvent_trace(q, cfg);
            q.method = TraceMethod::direct_solve;
            const double ds = resolvent_trace(q, cfg);
            worst = std::max(worst, std::abs(ti - ds) /
                                        std::max({std::abs(ti), std::abs(ds),
                                                  1e-12}));
        }
        suite.check("method_agreement", worst, cfg.crosscheck_rtol);
    }

    if (skip_mc) {
        suite.skip("mc_agreement", "disabled on request");
    } else if (!both_open) {
        suite.skip("mc_agreement", "degenerate: a channel never fires");
    } else {
        if (run_mc_verify(opt, mc_atoms) == 0)
            suite.pass("mc_agreement", "all record estimates within 3 sigma");
        else
            suite.fail("mc_agreement", "record estimates outside 3 sigma");
    }

    std::printf("verify: %d checks run, %d skipped, %d failed\n", suite.ran,
                suite.skipped, suite.failures);
    return suite.failures == 0 ? 0 : 1;
}

} // namespace maser_cli
