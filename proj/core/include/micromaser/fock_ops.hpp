#pragma once

#include <span>

#include <micromaser/banded.hpp>
#include <micromaser/params.hpp>
#include <micromaser/photon_distribution.hpp>

namespace micromaser {

// A detection channel bundled with the parameters that define its jump part
// X+ (detector-weighted passage through A, B, or both) and the complementary
// no-detection generator X- = X - X+.
struct ChannelSplit {
    Channel channel = Channel::AB;
    MaserParams params;
};

// Thermal damping generator L: gain/loss exchange with the reservoir at
// rates (nu+1)n/n_ex downward and nu(n+1)/n_ex upward. Trace-free up to the
// up-flux leaking past the truncation boundary.
PhotonDistribution apply_damping(const PhotonDistribution& p,
                                 const MaserParams& params);

// Passage map A: the atom exits still excited; photon number unchanged,
// weights scaled by cos^2(phi*sqrt(n+1)).
PhotonDistribution apply_pass_excited(const PhotonDistribution& p,
                                      const MaserParams& params);

// Passage map B: the atom exits de-excited and deposits one photon; weight
// sin^2(phi*sqrt(n)) arrives at n from n-1. Mass that would land past n_max
// is clipped into truncation_loss; throws TruncationOverflow when the clip
// exceeds the relative threshold.
PhotonDistribution apply_pass_deexcited(const PhotonDistribution& p,
                                        const MaserParams& params);

// Full evolution generator X = L + A + B - 1.
PhotonDistribution apply_generator(const PhotonDistribution& p,
                                   const MaserParams& params);

// Jump part X+ of the channel: eta_a*A, eta_b*B, or their sum.
PhotonDistribution apply_jump(const ChannelSplit& split,
                              const PhotonDistribution& p);

// No-detection generator X- = X - X+.
PhotonDistribution apply_no_detection(const ChannelSplit& split,
                                      const PhotonDistribution& p);

// tr{X+ p} as a functional, without forming the jump vector. Evaluates the
// exact sum including the contribution that apply_pass_deexcited would clip.
double jump_trace(const ChannelSplit& split, std::span<const double> weights);
double jump_trace(const ChannelSplit& split, const PhotonDistribution& p);

// Banded (tridiagonal) assemblies of the same maps. These agree with the
// matrix-free applications to a few ulps and feed the direct-solve path.
BandedMatrix generator_matrix(const MaserParams& params, int n_max);
BandedMatrix jump_matrix(const ChannelSplit& split, int n_max);
BandedMatrix no_detection_matrix(const ChannelSplit& split, int n_max);

// Relative threshold on mass clipped in a single application.
inline constexpr double kTruncationClipTol = 1e-9;

} // namespace micromaser
