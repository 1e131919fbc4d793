#include <micromaser/sweep.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <micromaser/errors.hpp>
#include <micromaser/statistics.hpp>

namespace micromaser {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Lazy per-point evaluation state so observables that share intermediates
// (rates, gamma, waiting times) are computed once.
struct PointEval {
    MaserParams params;
    NumericsConfig cfg;
    TraceMethod method;

    std::optional<SteadyState> ss_;
    std::optional<RatePair> rates_;
    std::optional<SuccessiveRuns> runs_;
    std::optional<std::vector<StatReport>> waits_;

    const SteadyState& steady() {
        if (!ss_) ss_ = steady_state(params, cfg);
        return *ss_;
    }
    const RatePair& rates() {
        if (!rates_) rates_ = detection_rates(steady());
        return *rates_;
    }
    const SuccessiveRuns& runs() {
        if (!runs_) runs_ = mean_successive(steady(), method, cfg);
        return *runs_;
    }
    const StatReport& wait(const std::string& name) {
        if (!waits_) waits_ = waiting_times(steady(), method, cfg);
        for (const StatReport& r : *waits_)
            if (r.name == name) return r;
        throw InvalidParams("unknown waiting-time report " + name);
    }
    double fano_at_lifetimes(Channel ch, double lifetimes) {
        const double t_rep = std::isinf(lifetimes)
                                 ? kInf
                                 : params.report_time(lifetimes * params.n_ex);
        return fano_mandel(ch, t_rep, steady(), cfg);
    }
    double mean_photons() {
        const SteadyState& s = steady();
        double acc = 0.0;
        for (int n = 0; n <= s.dist.n_max(); ++n) acc += n * s.dist.weights[n];
        return acc;
    }
};

double eval_one(const std::string& name, PointEval& pt) {
    if (name == "pa") return pt.rates().p_a();
    if (name == "pb") return pt.rates().p_b();
    if (name == "ra") return pt.rates().rate_a();
    if (name == "rb") return pt.rates().rate_b();
    if (name == "I") return atomic_inversion(pt.steady()).per_injected;
    if (name == "Itilde") return atomic_inversion(pt.steady()).per_detected;
    if (name == "gamma") return pt.runs().gamma.value;
    if (name == "gamma_diff") return pt.runs().gamma.ordering_diff;

    if (name == "na") return pt.runs().n_a.value;
    if (name == "nb") return pt.runs().n_b.value;
    if (name == "nmean") return pt.runs().n_mean.value;
    if (name == "na_uncor") return pt.runs().n_a.uncorrelated;
    if (name == "nb_uncor") return pt.runs().n_b.uncorrelated;
    if (name == "nmean_uncor") return pt.runs().n_mean.uncorrelated;
    if (name == "nnorm") return pt.runs().n_mean.normalized;

    if (name == "taa") return pt.wait("t_AA").value;
    if (name == "tbb") return pt.wait("t_BB").value;
    if (name == "t2aa") return pt.wait("t2_AA").value;
    if (name == "t2bb") return pt.wait("t2_BB").value;
    if (name == "tab") return pt.wait("t_AB").value;
    if (name == "tba") return pt.wait("t_BA").value;
    if (name == "taa_norm") return pt.wait("t_AA").normalized;
    if (name == "tbb_norm") return pt.wait("t_BB").normalized;
    if (name == "t2aa_norm") return pt.wait("t2_AA").normalized;
    if (name == "t2bb_norm") return pt.wait("t2_BB").normalized;
    if (name == "tab_norm") return pt.wait("t_AB").normalized;
    if (name == "tba_norm") return pt.wait("t_BA").normalized;
    // Waiting times scaled by r*eta of the target detector, unit-free.
    if (name == "tab_scaled")
        return pt.wait("t_AB").value / pt.params.report_time(1.0) * pt.params.eta_b;
    if (name == "tba_scaled")
        return pt.wait("t_BA").value / pt.params.report_time(1.0) * pt.params.eta_a;

    if (name == "qa_inf") return pt.fano_at_lifetimes(Channel::A, kInf);
    if (name == "qb_inf") return pt.fano_at_lifetimes(Channel::B, kInf);
    if (name == "qa_inf_scaled")
        return pt.fano_at_lifetimes(Channel::A, kInf) / pt.params.eta_a;
    if (name == "qb_inf_scaled")
        return pt.fano_at_lifetimes(Channel::B, kInf) / pt.params.eta_b;
    if (name == "qb_1g") return pt.fano_at_lifetimes(Channel::B, 1.0);
    if (name == "qb_4g") return pt.fano_at_lifetimes(Channel::B, 4.0);
    if (name == "qb_avg_1_4g") {
        // Uniform average over a 16-point window grid between one and four
        // cavity decay times.
        double acc = 0.0;
        for (int i = 0; i < 16; ++i)
            acc += pt.fano_at_lifetimes(Channel::B, 1.0 + 3.0 * i / 15.0);
        return acc / 16.0;
    }

    if (name == "nbar") return pt.mean_photons();
    if (name == "p0") return pt.steady().dist.weights[0];
    if (name == "residual") return pt.steady().residual;
    if (name == "nmax") return pt.steady().dist.n_max();

    throw InvalidParams("unknown observable: " + name);
}

} // namespace

std::vector<std::string> known_observables() {
    return {"pa",          "pb",          "ra",        "rb",
            "I",           "Itilde",      "gamma",     "gamma_diff",
            "na",          "nb",          "nmean",     "na_uncor",
            "nb_uncor",    "nmean_uncor", "nnorm",     "taa",
            "tbb",         "t2aa",        "t2bb",      "tab",
            "tba",         "taa_norm",    "tbb_norm",  "t2aa_norm",
            "t2bb_norm",   "tab_norm",    "tba_norm",  "tab_scaled",
            "tba_scaled",  "qa_inf",      "qb_inf",    "qa_inf_scaled",
            "qb_inf_scaled", "qb_1g",     "qb_4g",     "qb_avg_1_4g",
            "nbar",        "p0",          "residual",  "nmax"};
}

double evaluate_observable(const std::string& name, const MaserParams& params,
                           TraceMethod method, const NumericsConfig& cfg) {
    PointEval pt{params, cfg, method, {}, {}, {}, {}};
    return eval_one(name, pt);
}

void gauss_hermite(int k, std::vector<double>& nodes,
                   std::vector<double>& weights) {
    if (k < 1) throw InvalidParams("quadrature needs at least one node");
    nodes.assign(k, 0.0);
    weights.assign(k, 0.0);

    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    const int m = (k + 1) / 2;
    double z = 0.0, pp = 0.0;

    for (int i = 0; i < m; ++i) {
        // Stroud & Secrest initial guesses, largest root first.
        if (i == 0)
            z = std::sqrt(2.0 * k + 1.0) -
                1.85575 * std::pow(2.0 * k + 1.0, -1.0 / 6.0);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(k), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * nodes[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * nodes[1];
        else
            z = 2.0 * z - nodes[i - 2];

        for (int it = 0; it < 64; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < k; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * k) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        nodes[i] = z;
        nodes[k - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[k - 1 - i] = weights[i];
    }
}

std::string format_csv_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

const char* method_tag(TraceMethod m) {
    switch (m) {
        case TraceMethod::time_integration: return "time_integration";
        case TraceMethod::direct_solve: return "direct_solve";
        case TraceMethod::both: return "both";
    }
    return "?";
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    spec.params.validate();
    if (spec.points < 2) throw InvalidParams("a sweep needs at least 2 points");
    if (!(spec.start < spec.stop)) throw InvalidParams("start must precede stop");
    if (spec.axis == SweepAxis::t_int && !(spec.coupling_g_khz > 0.0))
        throw InvalidParams("t_int sweeps need a positive coupling");
    if (spec.t_int_sigma_us > 0.0 && spec.gauss_points < 3)
        throw InvalidParams("Gaussian averaging needs at least 3 nodes");
    if (spec.t_int_sigma_us > 0.0 && spec.axis != SweepAxis::t_int)
        throw InvalidParams("interaction-time averaging needs the t_int axis");

    // phi [rad] = g [kHz] * t_int [us] * 1e-3
    const double g_to_phi = spec.coupling_g_khz * 1e-3;

    std::vector<double> grid(spec.points);
    for (int i = 0; i < spec.points; ++i)
        grid[i] = spec.start +
                  (spec.stop - spec.start) * i / static_cast<double>(spec.points - 1);

    std::vector<double> gh_nodes, gh_weights;
    if (spec.t_int_sigma_us > 0.0)
        gauss_hermite(spec.gauss_points, gh_nodes, gh_weights);

    struct Row {
        std::vector<double> values;
        std::string status = "ok";
    };
    std::vector<Row> rows(grid.size());

    auto eval_point = [&](int idx) {
        Row row;
        row.values.assign(spec.observables.size(), kNan);

        // Quadrature nodes in t_int (or the single direct point).
        std::vector<std::pair<double, double>> t_nodes;  // (axis value, weight)
        if (spec.t_int_sigma_us > 0.0) {
            const double spread = std::sqrt(2.0) * spec.t_int_sigma_us;
            double kept = 0.0;
            for (int j = 0; j < spec.gauss_points; ++j) {
                const double t = grid[idx] + spread * gh_nodes[j];
                if (t < 0.0) continue;  // dropped, weights renormalized below
                t_nodes.emplace_back(t, gh_weights[j]);
                kept += gh_weights[j];
            }
            if (t_nodes.empty()) {
                row.status = "error: all quadrature nodes below t_int = 0";
                return row;
            }
            for (auto& node : t_nodes) node.second /= kept;
        } else {
            t_nodes.emplace_back(grid[idx], 1.0);
        }

        std::vector<PointEval> evals;
        evals.reserve(t_nodes.size());
        for (const auto& [axis_value, weight] : t_nodes) {
            (void)weight;
            MaserParams p = spec.params;
            p.phi = spec.axis == SweepAxis::phi ? axis_value
                                                : axis_value * g_to_phi;
            evals.push_back(PointEval{p, spec.numerics, spec.method, {}, {}, {}, {}});
        }

        for (std::size_t o = 0; o < spec.observables.size(); ++o) {
            try {
                double acc = 0.0;
                for (std::size_t j = 0; j < t_nodes.size(); ++j)
                    acc += t_nodes[j].second * eval_one(spec.observables[o], evals[j]);
                row.values[o] = acc;
            } catch (const std::exception& e) {
                if (row.status == "ok")
                    row.status = sanitize(std::string("error: ") + e.what());
            }
        }
        return row;
    };

    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int workers =
        std::max(1, spec.threads > 0 ? spec.threads : (hw > 0 ? hw : 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            rows[i] = eval_point(static_cast<int>(i));
    } else {
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (std::size_t i = next.fetch_add(1); i < grid.size();
                 i = next.fetch_add(1))
                rows[i] = eval_point(static_cast<int>(i));
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }

    // Trapping angles covering the swept range.
    const double phi_lo =
        spec.axis == SweepAxis::phi ? spec.start : spec.start * g_to_phi;
    const double phi_hi =
        spec.axis == SweepAxis::phi ? spec.stop : spec.stop * g_to_phi;
    SweepResult result;
    for (const TrappingAngle& ta : trapping_angles(spec.trap_n0_max, phi_hi))
        if (ta.phi >= phi_lo) result.markers.push_back(ta);

    std::ostringstream csv;
    csv << "# micromaser sweep\n# ";
    csv << "nex=" << format_csv_number(spec.params.n_ex)
        << " nu=" << format_csv_number(spec.params.nu)
        << " eta_a=" << format_csv_number(spec.params.eta_a)
        << " eta_b=" << format_csv_number(spec.params.eta_b) << " time_unit="
        << (spec.params.time_unit == TimeUnit::cavity_decay ? "gamma" : "r")
        << " axis=" << (spec.axis == SweepAxis::phi ? "phi" : "tint")
        << " start=" << format_csv_number(spec.start)
        << " stop=" << format_csv_number(spec.stop) << " points=" << spec.points
        << " g_khz=" << format_csv_number(spec.coupling_g_khz)
        << " sigma_tint_us=" << format_csv_number(spec.t_int_sigma_us)
        << " gauss_points=" << spec.gauss_points
        << " method=" << method_tag(spec.method)
        << " nmax_floor=" << spec.numerics.nmax_floor
        << " nmax_cap=" << spec.numerics.nmax_cap
        << " tail_tol=" << format_csv_number(spec.numerics.steady_tail_tol)
        << " ode_rtol=" << format_csv_number(spec.numerics.ode_rtol)
        << " ode_atol=" << format_csv_number(spec.numerics.ode_atol)
        << " fixed_dt=" << format_csv_number(spec.numerics.fixed_dt)
        << " trace_rtol=" << format_csv_number(spec.numerics.trace_rtol)
        << "\n";
    csv << "# times and rates in units of "
        << (spec.params.time_unit == TimeUnit::cavity_decay ? "1/gamma"
                                                            : "1/r")
        << "; axis in " << (spec.axis == SweepAxis::phi ? "rad" : "us") << "\n";

    csv << (spec.axis == SweepAxis::phi ? "phi" : "tint_us");
    for (const std::string& name : spec.observables) csv << ',' << name;
    csv << ",status\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        csv << format_csv_number(grid[i]);
        for (double v : rows[i].values) csv << ',' << format_csv_number(v);
        csv << ',' << rows[i].status << '\n';
    }
    result.csv = csv.str();
    return result;
}

} // namespace micromaser
