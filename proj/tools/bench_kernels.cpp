// Parallel kernels vs their serial reference implementations. Run with
// --benchmark_min_time=0.1s for a quick sanity pass; default settings give
// stable numbers.

#include <benchmark/benchmark.h>

#include <vector>

#include "cbfswarm/core.hpp"
#include "cbfswarm/riskmap.hpp"
#include "cbfswarm/risk.hpp"
#include "cbfswarm/rng.hpp"

namespace {

using namespace cbfswarm;

Scene make_scene(int n) {
    SplitRng rng(42, 9);
    std::vector<AgentState> agents;
    agents.reserve(n);
    for (int k = 0; k < n; ++k) {
        const Vec2 pos{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)};
        const Vec2 vel{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        agents.emplace_back(k + 1, pos, vel, 2.0, 1.0,
                            NoiseModel({0.0, 0.0}, Mat2::diagonal(0.0025, 0.0025)));
    }
    const double offset = Scene::default_loss_offset(agents);
    return Scene(std::move(agents), 0.95, offset);
}

void bench_scene_risk_parallel(benchmark::State& state) {
    const Scene scene = make_scene(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(risk::evaluate_scene_risk(scene, 0));
    }
}

void bench_scene_risk_serial(benchmark::State& state) {
    const Scene scene = make_scene(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(risk::evaluate_scene_risk_serial(scene, 0));
    }
}

void bench_riskmap_parallel(benchmark::State& state) {
    const Scene scene = make_scene(8);
    const riskmap::Rect bounds{{-60.0, -60.0}, {60.0, 60.0}};
    const int res = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(riskmap::compute_grid(scene, bounds, res));
    }
}

void bench_riskmap_serial(benchmark::State& state) {
    const Scene scene = make_scene(8);
    const riskmap::Rect bounds{{-60.0, -60.0}, {60.0, 60.0}};
    const int res = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(riskmap::compute_grid_serial(
            scene.agents, scene.alpha, scene.loss_offset_c, bounds, res));
    }
}

}  // namespace

BENCHMARK(bench_scene_risk_parallel)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(bench_scene_risk_serial)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(bench_riskmap_parallel)->Arg(64)->Arg(200);
BENCHMARK(bench_riskmap_serial)->Arg(64)->Arg(200);

BENCHMARK_MAIN();
