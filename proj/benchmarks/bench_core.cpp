#include <cmath>

#include <benchmark/benchmark.h>

#include "delaybif/analytic_stability.hpp"
#include "delaybif/dde_sim.hpp"
#include "delaybif/floquet.hpp"
#include "delaybif/lyapunov.hpp"
#include "delaybif/spectrum.hpp"

using namespace delaybif;

namespace {

const SwingParams kRef = reference_params();
const double kC = std::sqrt(1.0 - kRef.w * kRef.w);

PeriodicOrbit sample_orbit_at(double delta) {
    const HopfPoint hp = hopf_points(kRef.a, kRef.atilde, kC, 0).tau1[0];
    SwingParams p = kRef;
    p.tau = hp.tau + delta;
    return orbit_from_hopf(p, hp);
}

void BM_HopfTable(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(hopf_points(kRef.a, kRef.atilde, kC, state.range(0)));
}
BENCHMARK(BM_HopfTable)->Arg(10)->Arg(100);

void BM_LyapunovSign(benchmark::State& state) {
    const NonlinearityJet jet = swing_jet(kRef, equilibria(kRef, 0.0, 2 * kPi).points.front());
    const HopfPoint h = hopf_points(kRef.a, kRef.atilde, kC, 0).tau1[0];
    for (auto _ : state) benchmark::DoNotOptimize(sign_first_lyapunov(jet, kRef.a, kRef.atilde, h.omega, h.tau));
}
BENCHMARK(BM_LyapunovSign);

void BM_Spectrum(benchmark::State& state) {
    const Quasipolynomial q{kRef.a, kRef.atilde, kC, static_cast<double>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(approximate_spectrum(q));
}
BENCHMARK(BM_Spectrum)->Arg(3)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Integrate(benchmark::State& state) {
    const SwingParams p = reference_params(2.5);
    for (auto _ : state) benchmark::DoNotOptimize(integrate(p, InitialFunction::constant({0.1, 0.0}), 500.0));
}
BENCHMARK(BM_Integrate)->Unit(benchmark::kMillisecond);

void BM_NewtonCorrect(benchmark::State& state) {
    const PeriodicOrbit o = sample_orbit_at(0.05);
    SwingParams p = o.params;
    p.tau += 0.01;
    for (auto _ : state) benchmark::DoNotOptimize(newton_correct(o, p));
}
BENCHMARK(BM_NewtonCorrect)->Unit(benchmark::kMillisecond);

void BM_Floquet(benchmark::State& state) {
    const PeriodicOrbit o = sample_orbit_at(0.05);
    for (auto _ : state) benchmark::DoNotOptimize(floquet_multipliers(o));
}
BENCHMARK(BM_Floquet)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
