#pragma once

#include <vector>

namespace micromaser {

// Weight vector over photon numbers n = 0..n_max.
//
// A normalized physical state sums to one; a state conditioned on the
// absence of detections sums to its exclusion probability; difference
// vectors (e.g. correlation seeds) may carry signed weights.
struct PhotonDistribution {
    std::vector<double> weights;
    double truncation_loss = 0.0;  // mass clipped at the n_max boundary so far

    int n_max() const { return static_cast<int>(weights.size()) - 1; }
    int size() const { return static_cast<int>(weights.size()); }

    double sum() const;
    double l1_norm() const;
    double max_abs() const;

    // Rescales to unit sum. Throws NumericalError on a zero-sum vector.
    PhotonDistribution& normalize();

    static PhotonDistribution zeros(int n_max);
    static PhotonDistribution fock(int n, int n_max);
};

} // namespace micromaser
