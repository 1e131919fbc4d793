#include <benchmark/benchmark.h>

#include <cmath>
#include <limits>

#include <micromaser/banded.hpp>
#include <micromaser/statistics.hpp>
#include <micromaser/trajectory.hpp>

using namespace micromaser;

namespace {

MaserParams params_at(double phi, double eta = 0.4) {
    MaserParams p;
    p.n_ex = 7.0;
    p.nu = 0.054;
    p.phi = phi;
    p.eta_a = eta;
    p.eta_b = eta;
    return p;
}

void BM_SteadyState(benchmark::State& state) {
    double phi = 0.1;
    for (auto _ : state) {
        phi = phi < 10.0 ? phi + 0.05 : 0.1;
        benchmark::DoNotOptimize(steady_state(params_at(phi)));
    }
}
BENCHMARK(BM_SteadyState);

void BM_GeneratorApply(benchmark::State& state) {
    const MaserParams p = params_at(1.0);
    const SteadyState ss = steady_state(p);
    const BandedMatrix x = generator_matrix(p, ss.dist.n_max());
    std::vector<double> out(ss.dist.weights.size());
    for (auto _ : state) {
        x.apply(ss.dist.weights, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_GeneratorApply);

void BM_BandedFactorSolve(benchmark::State& state) {
    const MaserParams p = params_at(1.0);
    const SteadyState ss = steady_state(p);
    BandedMatrix m = no_detection_matrix({Channel::AB, p}, ss.dist.n_max());
    m.scale(-1.0);
    for (auto _ : state) {
        const BandedLU lu(m);
        benchmark::DoNotOptimize(lu.solve(ss.dist.weights));
    }
}
BENCHMARK(BM_BandedFactorSolve);

void BM_ResolventTraceDirect(benchmark::State& state) {
    const MaserParams p = params_at(1.0);
    const SteadyState ss = steady_state(p);
    TraceQuery q;
    q.left = TraceQuery::LeftOp::jump_A;
    q.resolvent_channel = {Channel::AB, p};
    q.resolvent_power = 1;
    q.seed = apply_jump({Channel::B, p}, ss.dist);
    q.method = TraceMethod::direct_solve;
    for (auto _ : state) benchmark::DoNotOptimize(resolvent_trace(q));
}
BENCHMARK(BM_ResolventTraceDirect);

void BM_ResolventTraceTime(benchmark::State& state) {
    const MaserParams p = params_at(1.0);
    const SteadyState ss = steady_state(p);
    TraceQuery q;
    q.left = TraceQuery::LeftOp::jump_A;
    q.resolvent_channel = {Channel::AB, p};
    q.resolvent_power = 1;
    q.seed = apply_jump({Channel::B, p}, ss.dist);
    q.method = TraceMethod::time_integration;
    for (auto _ : state) benchmark::DoNotOptimize(resolvent_trace(q));
}
BENCHMARK(BM_ResolventTraceTime);

void BM_WaitingTimes(benchmark::State& state) {
    const SteadyState ss = steady_state(params_at(1.0));
    for (auto _ : state)
        benchmark::DoNotOptimize(waiting_times(ss, TraceMethod::time_integration));
}
BENCHMARK(BM_WaitingTimes);

void BM_FanoStationary(benchmark::State& state) {
    const SteadyState ss = steady_state(params_at(1.0));
    const double inf = std::numeric_limits<double>::infinity();
    for (auto _ : state)
        benchmark::DoNotOptimize(fano_mandel(Channel::B, inf, ss));
}
BENCHMARK(BM_FanoStationary);

void BM_Simulate100k(benchmark::State& state) {
    const MaserParams p = params_at(1.0);
    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate(p, 100000, seed++));
    state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_Simulate100k);

} // namespace

BENCHMARK_MAIN();
