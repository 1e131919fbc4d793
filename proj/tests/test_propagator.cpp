#include <doctest.h>

#include <cmath>
#include <vector>

#include <micromaser/errors.hpp>
#include <micromaser/fock_ops.hpp>
#include <micromaser/propagator.hpp>
#include <micromaser/rng.hpp>
#include <micromaser/steady_state.hpp>

using namespace micromaser;

namespace {

MaserParams standard(double eta = 1.0) {
    MaserParams p;
    p.n_ex = 7.0;
    p.nu = 0.054;
    p.phi = 1.0;
    p.eta_a = eta;
    p.eta_b = eta;
    return p;
}

} // namespace

TEST_CASE("zero duration returns the initial state unchanged") {
    const MaserParams p = standard();
    const SteadyState ss = steady_state(p);
    const EvolutionResult r =
        evolve_no_detection({Channel::AB, p}, ss.dist, 0.0, 0.0);
    CHECK(r.final.weights == ss.dist.weights);
    CHECK(r.u_final == doctest::Approx(1.0));
    CHECK(r.steps == 0);
}

TEST_CASE("with detectors off the stationary state does not move") {
    MaserParams p = standard(0.0);
    const SteadyState ss = steady_state(p);
    const EvolutionResult r =
        evolve_no_detection({Channel::AB, p}, ss.dist, 5.0, 1e-11);
    for (int n = 0; n <= ss.dist.n_max(); ++n)
        CHECK(std::abs(r.final.weights[n] - ss.dist.weights[n]) < 1e-10);
    CHECK(r.u_final == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("exclusion probability decays monotonically") {
    const MaserParams p = standard(0.4);
    const SteadyState ss = steady_state(p);
    const ChannelSplit split{Channel::AB, p};

    PhotonDistribution state = ss.dist;
    double prev_u = 1.0;
    for (int seg = 0; seg < 12; ++seg) {
        const EvolutionResult r = evolve_no_detection(split, state, 0.5, 1e-11);
        CHECK(r.u_final <= prev_u + 1e-12);
        // u' = -tr{X+ w}: the loss rate is exactly the jump trace.
        CHECK(jump_trace(split, r.final) >= -1e-14);
        prev_u = r.u_final;
        state = r.final;
    }
    CHECK(prev_u < 1.0);
    CHECK(prev_u >= 0.0);
}

TEST_CASE("semigroup property of the no-detection evolution") {
    const MaserParams p = standard(0.4);
    const SteadyState ss = steady_state(p);
    const ChannelSplit split{Channel::B, p};

    const EvolutionResult whole =
        evolve_no_detection(split, ss.dist, 3.0, 1e-12);
    const EvolutionResult part1 =
        evolve_no_detection(split, ss.dist, 1.2, 1e-12);
    const EvolutionResult part2 =
        evolve_no_detection(split, part1.final, 1.8, 1e-12);
    for (int n = 0; n <= ss.dist.n_max(); ++n)
        CHECK(std::abs(whole.final.weights[n] - part2.final.weights[n]) < 1e-11);
}

TEST_CASE("unconditioned propagation preserves the trace and relaxes") {
    const MaserParams p = standard();
    const SteadyState ss = steady_state(p);

    // stationarity
    const PhotonDistribution kept =
        propagate_unconditioned(ss.dist, p, 4.0, 1e-11);
    double dist = 0.0;
    for (int n = 0; n <= ss.dist.n_max(); ++n)
        dist += std::abs(kept.weights[n] - ss.dist.weights[n]);
    CHECK(dist < 1e-9);

    // trace preservation from a random normalized start
    Xoshiro256PlusPlus rng(41);
    PhotonDistribution start = PhotonDistribution::zeros(ss.dist.n_max());
    for (int n = 0; n + 6 <= start.n_max(); ++n) start.weights[n] = rng.uniform();
    start.normalize();
    const PhotonDistribution out = propagate_unconditioned(start, p, 2.0, 1e-11);
    CHECK(out.sum() == doctest::Approx(1.0).epsilon(1e-10));

    // long-time relaxation to the stationary state
    const PhotonDistribution late =
        propagate_unconditioned(start, p, 60.0 * p.n_ex, 1e-11);
    double l1 = 0.0;
    for (int n = 0; n <= start.n_max(); ++n)
        l1 += std::abs(late.weights[n] - ss.dist.weights[n]);
    CHECK(l1 < 1e-8);
}

TEST_CASE("power-2 resolvent trace of the post-detection state is unity") {
    for (double eta : {1.0, 0.4, 0.1}) {
        const MaserParams p = standard(eta);
        const SteadyState ss = steady_state(p);
        const PhotonDistribution seed = apply_jump({Channel::A, p}, ss.dist);

        TraceQuery q;
        q.left = TraceQuery::LeftOp::jump_A;
        q.resolvent_channel = {Channel::A, p};
        q.resolvent_power = 2;
        q.seed = seed;

        q.method = TraceMethod::direct_solve;
        CHECK(resolvent_trace(q) == doctest::Approx(1.0).epsilon(1e-11));
        q.method = TraceMethod::time_integration;
        CHECK(resolvent_trace(q) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("switch trace is symmetric under operator ordering") {
    const MaserParams p = standard(0.4);
    const SteadyState ss = steady_state(p);

    TraceQuery q;
    q.resolvent_channel = {Channel::AB, p};
    q.resolvent_power = 1;
    q.method = TraceMethod::time_integration;

    q.left = TraceQuery::LeftOp::jump_A;
    q.seed = apply_jump({Channel::B, p}, ss.dist);
    const double g_ab = resolvent_trace(q);

    q.left = TraceQuery::LeftOp::jump_B;
    q.seed = apply_jump({Channel::A, p}, ss.dist);
    const double g_ba = resolvent_trace(q);

    CHECK(std::abs(g_ab - g_ba) < 1e-9);
}

TEST_CASE("time integration and direct solve agree on random queries") {
    Xoshiro256PlusPlus rng(4242);
    NumericsConfig cfg;

    for (int trial = 0; trial < 12; ++trial) {
        MaserParams p = standard();
        p.phi = 0.1 + 9.9 * rng.uniform();
        p.eta_a = 0.05 + 0.95 * rng.uniform();
        p.eta_b = 0.05 + 0.95 * rng.uniform();
        const SteadyState ss = steady_state(p);

        TraceQuery q;
        const Channel channels[3] = {Channel::A, Channel::B, Channel::AB};
        q.resolvent_channel = {channels[rng.next() % 3], p};
        q.resolvent_power = 1 + static_cast<int>(rng.next() % 3);
        const TraceQuery::LeftOp lefts[4] = {
            TraceQuery::LeftOp::jump_A, TraceQuery::LeftOp::jump_B,
            TraceQuery::LeftOp::jump_AB, TraceQuery::LeftOp::identity_trace};
        q.left = lefts[rng.next() % 4];
        q.seed = rng.next() % 2
                     ? ss.dist
                     : apply_jump({channels[rng.next() % 3], p}, ss.dist);

        q.method = TraceMethod::time_integration;
        const double ti = resolvent_trace(q, cfg);
        q.method = TraceMethod::direct_solve;
        const double ds = resolvent_trace(q, cfg);
        CHECK(std::abs(ti - ds) <=
              1e-7 * std::max({std::abs(ti), std::abs(ds), 1e-12}));

        // `both` returns the time-integration value after cross-checking.
        q.method = TraceMethod::both;
        CHECK(resolvent_trace(q, cfg) == doctest::Approx(ti).epsilon(1e-12));
    }
}

TEST_CASE("resolvent apply routes agree elementwise") {
    const MaserParams p = standard(0.4);
    const SteadyState ss = steady_state(p);
    const PhotonDistribution seed = apply_jump({Channel::A, p}, ss.dist);

    const PhotonDistribution direct =
        resolvent_apply({Channel::AB, p}, seed, TraceMethod::direct_solve);
    const PhotonDistribution timed =
        resolvent_apply({Channel::AB, p}, seed, TraceMethod::time_integration);
    for (int n = 0; n <= seed.n_max(); ++n)
        CHECK(std::abs(direct.weights[n] - timed.weights[n]) <=
              1e-8 * direct.l1_norm());
}

TEST_CASE("a closed channel cannot host an improper integral") {
    MaserParams p = standard(0.0);  // both detectors off: X- == X, singular
    const SteadyState ss = steady_state(p);

    TraceQuery q;
    q.left = TraceQuery::LeftOp::identity_trace;
    q.resolvent_channel = {Channel::AB, p};
    q.resolvent_power = 1;
    q.seed = ss.dist;

    q.method = TraceMethod::direct_solve;
    CHECK_THROWS_AS(resolvent_trace(q), NumericalError);

    NumericsConfig small;
    small.max_horizon = 2e3;
    q.method = TraceMethod::time_integration;
    CHECK_THROWS_AS(resolvent_trace(q, small), NonDecayingTail);
}

TEST_CASE("fixed-step evolution is bit-reproducible") {
    const MaserParams p = standard(0.4);
    const SteadyState ss = steady_state(p);
    NumericsConfig cfg;
    cfg.fixed_dt = 0.01;

    const EvolutionResult a =
        evolve_no_detection({Channel::AB, p}, ss.dist, 2.0, 0.0, cfg);
    const EvolutionResult b =
        evolve_no_detection({Channel::AB, p}, ss.dist, 2.0, 0.0, cfg);
    CHECK(a.final.weights == b.final.weights);
    CHECK(a.steps == b.steps);
}

TEST_CASE("no-detection evolution keeps physical states nonnegative") {
    const MaserParams p = standard(0.4);
    const SteadyState ss = steady_state(p);
    PhotonDistribution state = ss.dist;
    for (int seg = 0; seg < 6; ++seg) {
        state = evolve_no_detection({Channel::AB, p}, state, 0.7, 1e-11).final;
        const double floor = -1e-12 * state.max_abs();
        for (double w : state.weights) CHECK(w >= floor);
    }
}
