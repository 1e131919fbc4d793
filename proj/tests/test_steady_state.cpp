#include <doctest.h>

#include <cmath>
#include <vector>

#include <micromaser/banded.hpp>
#include <micromaser/errors.hpp>
#include <micromaser/fock_ops.hpp>
#include <micromaser/steady_state.hpp>

using namespace micromaser;

namespace {

const double kPi = std::acos(-1.0);

MaserParams standard() {
    MaserParams p;
    p.n_ex = 7.0;
    p.nu = 0.054;
    p.phi = 1.0;
    return p;
}

// Inverse iteration on the banded generator, an independent route to the
// stationary vector.
PhotonDistribution null_vector(const MaserParams& p, int n_max) {
    BandedMatrix x = generator_matrix(p, n_max);
    x.shift_diagonal(-1e-12);
    const BandedLU lu(x);
    std::vector<double> v(n_max + 1, 1.0 / (n_max + 1));
    for (int it = 0; it < 3; ++it) {
        v = lu.solve(v);
        double norm = 0.0;
        for (double w : v) norm += std::abs(w);
        for (double& w : v) w /= norm;
    }
    PhotonDistribution out = PhotonDistribution::zeros(n_max);
    out.weights = v;
    double s = out.sum();
    for (double& w : out.weights) w /= s;
    return out;
}

} // namespace

TEST_CASE("zero Rabi angle gives the thermal distribution") {
    MaserParams p = standard();
    p.phi = 0.0;
    p.nu = 0.4;
    const SteadyState ss = steady_state(p);
    const double ratio = p.nu / (p.nu + 1.0);
    double expected = 1.0 - ratio;  // normalized geometric weights
    for (int n = 0; n <= ss.dist.n_max(); ++n) {
        CHECK(std::abs(ss.dist.weights[n] - expected) < 1e-13);
        expected *= ratio;
    }
}

TEST_CASE("vacuum trapping angle at zero temperature pins the vacuum") {
    MaserParams p = standard();
    p.nu = 0.0;
    p.phi = kPi;
    const SteadyState ss = steady_state(p);
    CHECK(ss.dist.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (int n = 1; n <= ss.dist.n_max(); ++n)
        CHECK(std::abs(ss.dist.weights[n]) < 1e-13);
}

TEST_CASE("stationary state is certified by the generator and a null solve") {
    const MaserParams p = standard();
    const SteadyState ss = steady_state(p);
    CHECK(ss.dist.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ss.residual < 1e-10);

    const PhotonDistribution nv = null_vector(p, ss.dist.n_max());
    double dist = 0.0;
    for (int n = 0; n <= ss.dist.n_max(); ++n)
        dist += std::abs(nv.weights[n] - ss.dist.weights[n]);
    CHECK(dist < 1e-10);
}

TEST_CASE("detailed-balance recurrence holds across the support") {
    const MaserParams p = standard();
    const SteadyState ss = steady_state(p);
    for (int n = 1; n <= ss.dist.n_max(); ++n) {
        const double prev = ss.dist.weights[n - 1];
        if (prev <= 1e-300) break;
        const double s = std::sin(p.phi * std::sqrt(static_cast<double>(n)));
        const double factor = (p.nu + p.n_ex * s * s / n) / (p.nu + 1.0);
        CHECK(ss.dist.weights[n] / prev == doctest::Approx(factor).epsilon(1e-12));
    }
}

TEST_CASE("truncation respects floor, tail tolerance, and the cap") {
    const SteadyState ss = steady_state(standard());
    CHECK(ss.dist.n_max() >= 32);
    CHECK(ss.dist.weights.back() < 1e-12);

    MaserParams big = standard();
    big.n_ex = 50.0;
    NumericsConfig tight;
    tight.nmax_floor = 8;
    tight.nmax_cap = 16;
    CHECK_THROWS_AS(steady_state(big, tight), NonConvergentTruncation);
}

TEST_CASE("trapping angles enumerate q*pi/sqrt(n0+1)") {
    const auto angles = trapping_angles(4, 10.0);
    REQUIRE(!angles.empty());

    bool saw_vacuum = false, saw_n3 = false;
    for (const TrappingAngle& ta : angles) {
        CHECK(ta.phi <= 10.0);
        CHECK(ta.n0 <= 4);
        CHECK(ta.q >= 1);
        CHECK(ta.phi ==
              doctest::Approx(ta.q * kPi / std::sqrt(ta.n0 + 1.0)).epsilon(1e-15));
        if (ta.n0 == 0 && ta.q == 1) {
            CHECK(ta.phi == doctest::Approx(kPi));
            saw_vacuum = true;
        }
        if (ta.n0 == 3 && ta.q == 1) {
            CHECK(ta.phi == doctest::Approx(kPi / 2.0));
            saw_n3 = true;
        }
    }
    CHECK(saw_vacuum);
    CHECK(saw_n3);
    for (std::size_t i = 1; i < angles.size(); ++i)
        CHECK(angles[i - 1].phi <= angles[i].phi);

    // exhaustive cross-enumeration
    std::size_t count = 0;
    for (int n0 = 0; n0 <= 4; ++n0)
        for (int q = 1; q * kPi / std::sqrt(n0 + 1.0) <= 10.0; ++q) ++count;
    CHECK(angles.size() == count);
}
