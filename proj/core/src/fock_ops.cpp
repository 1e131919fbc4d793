#include <micromaser/fock_ops.hpp>

#include <cmath>
#include <string>

#include <micromaser/errors.hpp>

namespace micromaser {

namespace {

// cos^2 / sin^2 of the Rabi angle accumulated over a passage that starts
// with n photons in the cavity.
inline double keep_weight(double phi, int n) {
    const double c = std::cos(phi * std::sqrt(static_cast<double>(n + 1)));
    return c * c;
}

inline double flip_weight(double phi, int n) {
    const double s = std::sin(phi * std::sqrt(static_cast<double>(n + 1)));
    return s * s;
}

void check_same_size(const PhotonDistribution& p) {
    if (p.weights.empty()) throw InvalidParams("empty photon distribution");
}

} // namespace

void MaserParams::validate() const {
    if (!(n_ex > 0.0)) throw InvalidParams("n_ex must be positive");
    if (!(nu >= 0.0)) throw InvalidParams("nu must be nonnegative");
    if (!(phi >= 0.0)) throw InvalidParams("phi must be nonnegative");
    if (!(eta_a >= 0.0 && eta_a <= 1.0)) throw InvalidParams("eta_a must lie in [0,1]");
    if (!(eta_b >= 0.0 && eta_b <= 1.0)) throw InvalidParams("eta_b must lie in [0,1]");
}

PhotonDistribution apply_damping(const PhotonDistribution& p,
                                 const MaserParams& params) {
    check_same_size(p);
    const int n_max = p.n_max();
    const double nu = params.nu;
    const double inv_nex = 1.0 / params.n_ex;
    PhotonDistribution out = PhotonDistribution::zeros(n_max);
    out.truncation_loss = p.truncation_loss;

    for (int n = 0; n <= n_max; ++n) {
        const double up = n + 1 <= n_max ? p.weights[n + 1] : 0.0;
        const double down = n >= 1 ? p.weights[n - 1] : 0.0;
        out.weights[n] =
            inv_nex * ((nu + 1.0) * ((n + 1) * up - n * p.weights[n]) +
                       nu * (n * down - (n + 1) * p.weights[n]));
    }
    return out;
}

PhotonDistribution apply_pass_excited(const PhotonDistribution& p,
                                      const MaserParams& params) {
    check_same_size(p);
    PhotonDistribution out = PhotonDistribution::zeros(p.n_max());
    out.truncation_loss = p.truncation_loss;
    for (int n = 0; n <= p.n_max(); ++n)
        out.weights[n] = keep_weight(params.phi, n) * p.weights[n];
    return out;
}

PhotonDistribution apply_pass_deexcited(const PhotonDistribution& p,
                                        const MaserParams& params) {
    check_same_size(p);
    const int n_max = p.n_max();
    PhotonDistribution out = PhotonDistribution::zeros(n_max);
    for (int n = 1; n <= n_max; ++n)
        out.weights[n] = flip_weight(params.phi, n - 1) * p.weights[n - 1];

    const double clipped = flip_weight(params.phi, n_max) * p.weights[n_max];
    out.truncation_loss = p.truncation_loss + clipped;
    if (std::abs(clipped) > kTruncationClipTol * std::max(p.l1_norm(), 1e-300))
        throw TruncationOverflow(
            "mass " + std::to_string(clipped) +
            " clipped at the photon-number truncation boundary");
    return out;
}

PhotonDistribution apply_generator(const PhotonDistribution& p,
                                   const MaserParams& params) {
    PhotonDistribution out = apply_damping(p, params);
    const PhotonDistribution keep = apply_pass_excited(p, params);
    const PhotonDistribution flip = apply_pass_deexcited(p, params);
    for (int n = 0; n <= p.n_max(); ++n)
        out.weights[n] += keep.weights[n] + flip.weights[n] - p.weights[n];
    out.truncation_loss = flip.truncation_loss;
    return out;
}

PhotonDistribution apply_jump(const ChannelSplit& split,
                              const PhotonDistribution& p) {
    const MaserParams& mp = split.params;
    switch (split.channel) {
        case Channel::A: {
            PhotonDistribution out = apply_pass_excited(p, mp);
            for (double& w : out.weights) w *= mp.eta_a;
            return out;
        }
        case Channel::B: {
            PhotonDistribution out = apply_pass_deexcited(p, mp);
            for (double& w : out.weights) w *= mp.eta_b;
            out.truncation_loss =
                p.truncation_loss + (out.truncation_loss - p.truncation_loss) * mp.eta_b;
            return out;
        }
        case Channel::AB: {
            PhotonDistribution keep = apply_pass_excited(p, mp);
            PhotonDistribution out = apply_pass_deexcited(p, mp);
            for (int n = 0; n <= p.n_max(); ++n)
                out.weights[n] =
                    mp.eta_a * keep.weights[n] + mp.eta_b * out.weights[n];
            out.truncation_loss =
                p.truncation_loss + (out.truncation_loss - p.truncation_loss) * mp.eta_b;
            return out;
        }
    }
    throw InvalidParams("unknown channel");
}

PhotonDistribution apply_no_detection(const ChannelSplit& split,
                                      const PhotonDistribution& p) {
    PhotonDistribution out = apply_generator(p, split.params);
    const PhotonDistribution jump = apply_jump(split, p);
    for (int n = 0; n <= p.n_max(); ++n) out.weights[n] -= jump.weights[n];
    return out;
}

double jump_trace(const ChannelSplit& split, std::span<const double> weights) {
    const MaserParams& mp = split.params;
    double acc_a = 0.0;
    double acc_b = 0.0;
    const bool want_a = split.channel != Channel::B;
    const bool want_b = split.channel != Channel::A;
    for (int n = 0; n < static_cast<int>(weights.size()); ++n) {
        if (want_a) acc_a += keep_weight(mp.phi, n) * weights[n];
        if (want_b) acc_b += flip_weight(mp.phi, n) * weights[n];
    }
    return mp.eta_a * (want_a ? acc_a : 0.0) + mp.eta_b * (want_b ? acc_b : 0.0);
}

double jump_trace(const ChannelSplit& split, const PhotonDistribution& p) {
    return jump_trace(split, std::span<const double>(p.weights));
}

BandedMatrix generator_matrix(const MaserParams& params, int n_max) {
    const int n = n_max + 1;
    BandedMatrix x(n, 1, 1);
    const double nu = params.nu;
    const double inv_nex = 1.0 / params.n_ex;

    for (int i = 0; i <= n_max; ++i) {
        // thermal damping
        double diag = -inv_nex * ((nu + 1.0) * i + nu * (i + 1));
        if (i + 1 <= n_max) x.at(i, i + 1) += inv_nex * (nu + 1.0) * (i + 1);
        if (i >= 1) x.at(i, i - 1) += inv_nex * nu * i;
        // atom passage minus identity
        diag += keep_weight(params.phi, i) - 1.0;
        if (i >= 1) x.at(i, i - 1) += flip_weight(params.phi, i - 1);
        x.at(i, i) += diag;
    }
    return x;
}

BandedMatrix jump_matrix(const ChannelSplit& split, int n_max) {
    const int n = n_max + 1;
    const MaserParams& mp = split.params;
    BandedMatrix j(n, 1, 1);
    if (split.channel != Channel::B)
        for (int i = 0; i <= n_max; ++i)
            j.at(i, i) += mp.eta_a * keep_weight(mp.phi, i);
    if (split.channel != Channel::A)
        for (int i = 1; i <= n_max; ++i)
            j.at(i, i - 1) += mp.eta_b * flip_weight(mp.phi, i - 1);
    return j;
}

BandedMatrix no_detection_matrix(const ChannelSplit& split, int n_max) {
    BandedMatrix x = generator_matrix(split.params, n_max);
    const BandedMatrix j = jump_matrix(split, n_max);
    x.axpy(-1.0, j);
    return x;
}

} // namespace micromaser
