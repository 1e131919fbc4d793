#include <micromaser/trajectory.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include <micromaser/errors.hpp>
#include <micromaser/rng.hpp>

namespace micromaser {

namespace {

// Batch-means estimate for a correlated sample series: contiguous batches of
// equal size, grand value = mean of batch means, error = sd of batch means
// over sqrt(K).
Estimate batch_means(const std::vector<double>& samples, long min_samples = 100) {
    const long n = static_cast<long>(samples.size());
    if (n < min_samples)
        throw InsufficientData("only " + std::to_string(n) +
                               " samples for a batch-means estimate");
    const long k = std::clamp<long>(n / 100, 32, 256);
    const long m = n / k;

    std::vector<double> means(k, 0.0);
    for (long b = 0; b < k; ++b) {
        double acc = 0.0;
        for (long i = b * m; i < (b + 1) * m; ++i) acc += samples[i];
        means[b] = acc / static_cast<double>(m);
    }
    double grand = 0.0;
    for (double v : means) grand += v;
    grand /= static_cast<double>(k);
    double var = 0.0;
    for (double v : means) var += (v - grand) * (v - grand);
    var /= static_cast<double>(k - 1);

    Estimate e;
    e.value = grand;
    e.std_error = std::sqrt(var / static_cast<double>(k));
    e.n_samples = k * m;
    return e;
}

char letter(Outcome o) {
    switch (o) {
        case Outcome::detected_A: return 'A';
        case Outcome::detected_B: return 'B';
        case Outcome::undetected: return '.';
    }
    return '?';
}

struct Detections {
    std::vector<double> times;
    std::string letters;
};

Detections detections_of(const DetectionRecord& rec) {
    Detections d;
    for (const DetectionEvent& ev : rec.events) {
        if (ev.outcome == Outcome::undetected) continue;
        d.times.push_back(ev.time);
        d.letters.push_back(letter(ev.outcome));
    }
    return d;
}

std::vector<double> same_channel_gaps(const Detections& d, char ch) {
    std::vector<double> gaps;
    double last = -1.0;
    for (std::size_t i = 0; i < d.times.size(); ++i) {
        if (d.letters[i] != ch) continue;
        if (last >= 0.0) gaps.push_back(d.times[i] - last);
        last = d.times[i];
    }
    return gaps;
}

std::vector<double> cross_channel_gaps(const Detections& d, char from, char to) {
    std::vector<double> gaps;
    std::size_t j = 0;
    for (std::size_t i = 0; i < d.times.size(); ++i) {
        if (d.letters[i] != from) continue;
        if (j < i + 1) j = i + 1;
        while (j < d.times.size() && d.letters[j] != to) ++j;
        if (j == d.times.size()) break;
        gaps.push_back(d.times[j] - d.times[i]);
    }
    return gaps;
}

// Maximal-run lengths for one channel; the first and last runs are censored
// by the record boundaries and dropped.
std::vector<double> run_lengths(const Detections& d, char ch) {
    std::vector<double> runs;
    std::size_t i = 0;
    const std::size_t n = d.letters.size();
    while (i < n) {
        std::size_t j = i;
        while (j < n && d.letters[j] == d.letters[i]) ++j;
        const bool interior = i > 0 && j < n;
        if (interior && d.letters[i] == ch)
            runs.push_back(static_cast<double>(j - i));
        i = j;
    }
    return runs;
}

Estimate estimate_sequence(const DetectionRecord& rec, const std::string& seq) {
    for (char c : seq)
        if (c != 'A' && c != 'B')
            throw InvalidParams("sequence must use the alphabet {A, B}");
    if (seq.empty() || seq.size() > 3)
        throw InvalidParams("record estimates cover sequences of length 1..3");

    const Detections d = detections_of(rec);
    if (d.letters.size() < seq.size())
        throw InsufficientData("record holds fewer detections than the sequence");
    std::vector<double> hits;
    hits.reserve(d.letters.size());
    for (std::size_t i = 0; i + seq.size() <= d.letters.size(); ++i)
        hits.push_back(d.letters.compare(i, seq.size(), seq) == 0 ? 1.0 : 0.0);
    return batch_means(hits);
}

// Normalized count-variance excess over tiled windows. Windows are
// correlated wherever the field relaxes slowly, so the value comes from the
// global variance/mean ratio and the error from a delete-block jackknife
// rather than from per-batch ratios, whose short-block variances are biased
// low.
Estimate estimate_fano(const DetectionRecord& rec, char ch, double window) {
    if (!(window > 0.0)) throw InvalidParams("window must be positive");
    const long m = static_cast<long>(rec.duration / window);
    if (m < 64) throw InsufficientData("too few counting windows");

    std::vector<double> counts(m, 0.0);
    double total_counts = 0.0;
    for (const DetectionEvent& ev : rec.events) {
        if (letter(ev.outcome) != ch) continue;
        const long w = static_cast<long>(ev.time / window);
        if (w >= 0 && w < m) {
            counts[w] += 1.0;
            total_counts += 1.0;
        }
    }
    if (total_counts < 100) throw InsufficientData("too few counted detections");

    const long k = std::clamp<long>(m / 32, 32, 256);
    const long per = m / k;
    const long used = k * per;

    std::vector<double> block_sum(k, 0.0), block_sumsq(k, 0.0);
    for (long b = 0; b < k; ++b)
        for (long i = b * per; i < (b + 1) * per; ++i) {
            block_sum[b] += counts[i];
            block_sumsq[b] += counts[i] * counts[i];
        }
    double sum = 0.0, sumsq = 0.0;
    for (long b = 0; b < k; ++b) {
        sum += block_sum[b];
        sumsq += block_sumsq[b];
    }

    auto q_of = [](double s, double ss_, double n) {
        const double mean = s / n;
        if (mean <= 0.0) return std::numeric_limits<double>::quiet_NaN();
        const double var = (ss_ - n * mean * mean) / (n - 1.0);
        return var / mean - 1.0;
    };

    const double q_all = q_of(sum, sumsq, static_cast<double>(used));
    std::vector<double> loo;
    loo.reserve(k);
    for (long b = 0; b < k; ++b) {
        const double q = q_of(sum - block_sum[b], sumsq - block_sumsq[b],
                              static_cast<double>(used - per));
        if (std::isfinite(q)) loo.push_back(q);
    }
    if (static_cast<long>(loo.size()) < 30 || !std::isfinite(q_all))
        throw InsufficientData("too few populated counting blocks");

    const double kk = static_cast<double>(loo.size());
    double loo_mean = 0.0;
    for (double q : loo) loo_mean += q;
    loo_mean /= kk;
    double var = 0.0;
    for (double q : loo) var += (q - loo_mean) * (q - loo_mean);

    Estimate e;
    e.value = kk * q_all - (kk - 1.0) * loo_mean;  // jackknife bias correction
    e.std_error = std::sqrt((kk - 1.0) / kk * var);
    e.n_samples = used;
    return e;
}

// Ratio-style per-batch estimates over the full event list (detected and
// undetected), for the inversion observables.
Estimate estimate_inversion(const DetectionRecord& rec, bool per_detected) {
    const long n = static_cast<long>(rec.events.size());
    if (n < 100) throw InsufficientData("too few atom passages");
    const long k = std::clamp<long>(n / 100, 32, 256);
    const long m = n / k;

    std::vector<double> vals;
    vals.reserve(k);
    for (long b = 0; b < k; ++b) {
        long da = 0, db = 0;
        for (long i = b * m; i < (b + 1) * m; ++i) {
            const Outcome o = rec.events[i].outcome;
            da += o == Outcome::detected_A;
            db += o == Outcome::detected_B;
        }
        if (per_detected) {
            if (da + db == 0) continue;
            vals.push_back(static_cast<double>(db - da) /
                           static_cast<double>(da + db));
        } else {
            vals.push_back(static_cast<double>(db - da) / static_cast<double>(m));
        }
    }
    if (static_cast<long>(vals.size()) < 30)
        throw InsufficientData("too few populated batches");

    double grand = 0.0;
    for (double v : vals) grand += v;
    grand /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - grand) * (v - grand);
    var /= static_cast<double>(vals.size() - 1);

    Estimate e;
    e.value = grand;
    e.std_error = std::sqrt(var / static_cast<double>(vals.size()));
    e.n_samples = static_cast<long>(vals.size()) * m;
    return e;
}

std::vector<double> squared(std::vector<double> v) {
    for (double& x : v) x *= x;
    return v;
}

} // namespace

DetectionRecord simulate(const MaserParams& params, long n_atoms,
                         std::uint64_t seed, const NumericsConfig& cfg) {
    params.validate();
    if (n_atoms < 1) throw InvalidParams("n_atoms must be at least 1");

    const int cap = cfg.nmax_cap;
    const long burn_in =
        cfg.mc_burn_in_atoms > 0
            ? cfg.mc_burn_in_atoms
            : std::max<long>(1000, std::lround(100.0 * params.n_ex));

    DetectionRecord rec;
    rec.seed = seed;
    rec.n_atoms = n_atoms;
    rec.params = params;
    rec.events.reserve(static_cast<std::size_t>(n_atoms));
    rec.arrival_photon_histogram.assign(static_cast<std::size_t>(cap) + 1, 0);

    Xoshiro256PlusPlus rng(seed);
    const double nu = params.nu;
    const double inv_nex = 1.0 / params.n_ex;
    int n = 0;
    double tau = 0.0;

    auto pass_one_atom = [&](bool recording) {
        const double target = tau + rng.exponential(1.0);
        // Thermal birth/death jumps race against the arrival deadline.
        while (true) {
            const double down = (nu + 1.0) * n * inv_nex;
            const double up = nu * (n + 1) * inv_nex;
            const double total = down + up;
            if (total <= 0.0) break;
            const double dt = rng.exponential(total);
            if (tau + dt >= target) break;
            tau += dt;
            if (rng.uniform() * total < down) {
                --n;
            } else if (n < cap) {
                ++n;
            } else {
                ++rec.overflow_events;
            }
        }
        tau = target;

        if (recording) ++rec.arrival_photon_histogram[static_cast<std::size_t>(n)];

        const double s = std::sin(params.phi * std::sqrt(static_cast<double>(n + 1)));
        const bool flipped = rng.uniform() < s * s;
        Outcome outcome;
        if (flipped) {
            if (n < cap) ++n; else ++rec.overflow_events;
            if (recording) ++rec.branch_b;
            const bool detected = rng.uniform() < params.eta_b;
            outcome = detected ? Outcome::detected_B : Outcome::undetected;
            if (recording && detected) ++rec.detected_b;
        } else {
            if (recording) ++rec.branch_a;
            const bool detected = rng.uniform() < params.eta_a;
            outcome = detected ? Outcome::detected_A : Outcome::undetected;
            if (recording && detected) ++rec.detected_a;
        }
        if (recording) rec.events.push_back({tau, outcome});
    };

    for (long i = 0; i < burn_in; ++i) pass_one_atom(false);
    tau = 0.0;
    for (long i = 0; i < n_atoms; ++i) pass_one_atom(true);

    rec.duration = rec.events.back().time;
    return rec;
}

Estimate estimate(const DetectionRecord& rec, std::string_view observable) {
    const std::string name(observable);

    if (name.starts_with("P[") && name.ends_with("]"))
        return estimate_sequence(rec, name.substr(2, name.size() - 3));
    if (name.starts_with("Q_A@") || name.starts_with("Q_B@")) {
        double window = 0.0;
        try {
            window = std::stod(name.substr(4));
        } catch (const std::exception&) {
            throw InvalidParams("malformed counting window in: " + name);
        }
        return estimate_fano(rec, name[2], window);
    }
    if (name == "I") return estimate_inversion(rec, false);
    if (name == "Itilde") return estimate_inversion(rec, true);

    const Detections d = detections_of(rec);
    if (name == "n_A") return batch_means(run_lengths(d, 'A'));
    if (name == "n_B") return batch_means(run_lengths(d, 'B'));
    if (name == "t_AA") return batch_means(same_channel_gaps(d, 'A'));
    if (name == "t_BB") return batch_means(same_channel_gaps(d, 'B'));
    if (name == "t2_AA") return batch_means(squared(same_channel_gaps(d, 'A')));
    if (name == "t2_BB") return batch_means(squared(same_channel_gaps(d, 'B')));
    if (name == "t_AB") return batch_means(cross_channel_gaps(d, 'A', 'B'));
    if (name == "t_BA") return batch_means(cross_channel_gaps(d, 'B', 'A'));

    throw InvalidParams("unknown record observable: " + name);
}

void dump_record(const DetectionRecord& rec, std::ostream& out) {
    char buf[64];
    for (const DetectionEvent& ev : rec.events) {
        const char* tag = ev.outcome == Outcome::detected_A   ? "A"
                          : ev.outcome == Outcome::detected_B ? "B"
                                                              : "none";
        std::snprintf(buf, sizeof buf, "%.15g %s\n", ev.time, tag);
        out << buf;
    }
}

} // namespace micromaser
