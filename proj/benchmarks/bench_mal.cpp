#include "mal/action.hpp"
#include "mal/fields.hpp"
#include "mal/geodesic.hpp"
#include "mal/lagrangian.hpp"
#include "mal/rearrangement.hpp"
#include "mal/transport.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

mal::Potential endpoint(const mal::Grid& g, double c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const mal::GridField h = mal::random_band_limited(g, 2, rng);
    const mal::Potential base = mal::constant_potential(g, c);
    return mal::make_potential(mal::GridField(g, c) + h * mal::admissible_scale(base, h, 0.5, 0.02));
}

void BM_Laplacian(benchmark::State& state) {
    const mal::Grid g(static_cast<int>(state.range(0)));
    std::mt19937_64 rng(1);
    const mal::GridField f = mal::random_band_limited(g, 2, rng);
    for (auto _ : state) benchmark::DoNotOptimize(mal::laplacian(f));
}
BENCHMARK(BM_Laplacian)->Arg(32)->Arg(64)->Arg(128);

void BM_DecreasingRearrangement(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto k = static_cast<std::size_t>(state.range(0));
    std::vector<double> v(k);
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) {
        v[i] = u(rng);
        w[i] = 0.1 + u(rng);
    }
    const mal::WeightedValues wv(v, w);
    for (auto _ : state) benchmark::DoNotOptimize(mal::decreasing_rearrangement(wv));
}
BENCHMARK(BM_DecreasingRearrangement)->Arg(1024)->Arg(4096)->Arg(16384);

void BM_EvaluateLagrangian(benchmark::State& state) {
    const mal::Grid g(64);
    const mal::Potential u = endpoint(g, 0.0, 3);
    std::mt19937_64 rng(3);
    const mal::GridField xi = mal::random_band_limited(g, 2, rng);
    const std::vector<mal::LagrangianSpec> specs{mal::LagrangianSpec::power(1.0), mal::LagrangianSpec::orlicz_power(2.0),
                                                 mal::LagrangianSpec::lorentz_weak(0.5)};
    const auto& spec = specs[static_cast<std::size_t>(state.range(0))];
    state.SetLabel(spec.text());
    for (auto _ : state) benchmark::DoNotOptimize(mal::evaluate(spec, u, xi));
}
BENCHMARK(BM_EvaluateLagrangian)->DenseRange(0, 2);

void BM_EpsGeodesic(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const mal::Grid g(n);
    const mal::EpsGeodesicProblem p{endpoint(g, 0.0, 4), endpoint(g, 0.5, 5), 0.0, 1.0, 0.1, n, 1e-8, 50};
    for (auto _ : state) benchmark::DoNotOptimize(mal::solve_epsilon_geodesic(p));
}
BENCHMARK(BM_EpsGeodesic)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_WeakGeodesic(benchmark::State& state) {
    const mal::Grid g(32);
    mal::WeakGeodesicOptions o;
    o.time_steps = 32;
    const mal::Potential a = endpoint(g, 0.0, 6);
    const mal::Potential b = endpoint(g, 0.5, 7);
    for (auto _ : state) benchmark::DoNotOptimize(mal::weak_geodesic(a, b, o));
}
BENCHMARK(BM_WeakGeodesic)->Unit(benchmark::kMillisecond);

void BM_TransportFlow(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const mal::Grid g(n);
    const mal::PotentialPath p({0.0, 1.0}, {endpoint(g, 0.0, 8), endpoint(g, 0.3, 9)},
                               mal::Interpolation::piecewise_linear);
    for (auto _ : state) benchmark::DoNotOptimize(mal::transport_flow(p, n / 2));
}
BENCHMARK(BM_TransportFlow)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_PathAction(benchmark::State& state) {
    const mal::Grid g(32);
    const auto paths = mal::competitor_paths(endpoint(g, 0.0, 10), endpoint(g, 0.3, 11), 1.0, 1, 12);
    const mal::LagrangianSpec spec = mal::LagrangianSpec::lorentz_weak(0.5);
    for (auto _ : state) benchmark::DoNotOptimize(mal::path_action(spec, paths[0]));
}
BENCHMARK(BM_PathAction)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
