#include <micromaser/photon_distribution.hpp>

#include <algorithm>
#include <cmath>

#include <micromaser/errors.hpp>

namespace micromaser {

double PhotonDistribution::sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double PhotonDistribution::l1_norm() const {
    double s = 0.0;
    for (double w : weights) s += std::abs(w);
    return s;
}

double PhotonDistribution::max_abs() const {
    double m = 0.0;
    for (double w : weights) m = std::max(m, std::abs(w));
    return m;
}

PhotonDistribution& PhotonDistribution::normalize() {
    const double s = sum();
    if (s == 0.0) throw NumericalError("cannot normalize a zero-sum weight vector");
    for (double& w : weights) w /= s;
    return *this;
}

PhotonDistribution PhotonDistribution::zeros(int n_max) {
    PhotonDistribution p;
    p.weights.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    return p;
}

PhotonDistribution PhotonDistribution::fock(int n, int n_max) {
    if (n < 0 || n > n_max)
        throw InvalidParams("occupation outside the truncated space");
    PhotonDistribution p = zeros(n_max);
    p.weights[static_cast<std::size_t>(n)] = 1.0;
    return p;
}

} // namespace micromaser
