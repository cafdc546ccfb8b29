#include <benchmark/benchmark.h>

#include "cpl/collision.hpp"

#include <random>

namespace {

cpl::Scene make_scene(int instances, int points_each) {
    std::mt19937_64 rng(99);
    auto u = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    cpl::Scene scene;
    for (int i = 0; i < instances; ++i) {
        cpl::SceneInstance inst;
        inst.id = std::to_string(i);
        for (int k = 0; k < points_each; ++k) {
            inst.cloud.points.emplace_back(u(-1, 1), u(-1, 1), u(-1, 1));
            inst.cloud.radii.push_back(0.05);
            inst.cloud.opacities.push_back(1.0);
            inst.cloud.colors.emplace_back(0.5, 0.5, 0.5);
        }
        inst.transform.translation = cpl::Vec3(u(-0.5, 0.5), u(-0.5, 0.5), u(-0.5, 0.5));
        scene.instances.push_back(std::move(inst));
    }
    return scene;
}

} // namespace

static void BM_CollisionScene(benchmark::State& state) {
    const cpl::Scene scene = make_scene(static_cast<int>(state.range(0)),
                                        static_cast<int>(state.range(1)));
    const cpl::CollisionOptions opts;
    for (auto _ : state) {
        const cpl::CollisionReport report = cpl::collision_loss_scene(scene, opts);
        benchmark::DoNotOptimize(report.total);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_CollisionScene)->Args({2, 500})->Args({4, 500})->Args({2, 4096})->Args({4, 4096});

static void BM_CollisionSubsampled(benchmark::State& state) {
    const cpl::Scene scene = make_scene(4, 20000);
    cpl::CollisionOptions opts;
    opts.max_points = 4096;
    for (auto _ : state) {
        const cpl::CollisionReport report = cpl::collision_loss_scene(scene, opts);
        benchmark::DoNotOptimize(report.total);
    }
}
BENCHMARK(BM_CollisionSubsampled);

static void BM_MeanSparsity(benchmark::State& state) {
    const cpl::Scene scene = make_scene(1, static_cast<int>(state.range(0)));
    const std::vector<cpl::Vec3> pts = cpl::world_points(scene.instances[0]);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cpl::mean_sparsity(pts));
    }
}
BENCHMARK(BM_MeanSparsity)->Arg(500)->Arg(4096)->Arg(20000);

BENCHMARK_MAIN();
