#include <benchmark/benchmark.h>

#include "cpl/optimizer.hpp"

#include <random>

namespace {

cpl::Scene two_balls(int points_each) {
    std::mt19937_64 rng(5);
    auto u = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    cpl::Scene scene;
    for (int i = 0; i < 2; ++i) {
        cpl::SceneInstance inst;
        inst.id = std::to_string(i);
        while (static_cast<int>(inst.cloud.points.size()) < points_each) {
            const cpl::Vec3 p(u(-1, 1), u(-1, 1), u(-1, 1));
            if (p.squaredNorm() <= 1.0) {
                inst.cloud.points.push_back(p);
                inst.cloud.radii.push_back(0.05);
                inst.cloud.opacities.push_back(1.0);
                inst.cloud.colors.emplace_back(0.5, 0.5, 0.5);
            }
        }
        inst.transform.translation = cpl::Vec3(0, 0, i == 0 ? -0.25 : 0.25);
        scene.instances.push_back(std::move(inst));
    }
    return scene;
}

} // namespace

// Collision-only refinement (the configuration the efficacy gate runs).
static void BM_RefineLayoutCollisionOnly(benchmark::State& state) {
    const cpl::Scene scene = two_balls(static_cast<int>(state.range(0)));
    cpl::LayoutOptConfig cfg;
    cfg.iterations = static_cast<int>(state.range(1));
    cfg.lambda_f = 0.0;
    for (auto _ : state) {
        const cpl::LayoutRefineResult result = cpl::refine_layout(scene, std::nullopt, cfg);
        benchmark::DoNotOptimize(result.trace.rows.size());
    }
}
BENCHMARK(BM_RefineLayoutCollisionOnly)->Args({500, 50})->Args({500, 400})->Args({2000, 50});

static void BM_RefinementPlan(benchmark::State& state) {
    const cpl::InstanceRefineConfig cfg = state.range(0) == 0
                                              ? cpl::InstanceRefineConfig::short_profile()
                                              : cpl::InstanceRefineConfig::extended_profile();
    for (auto _ : state) {
        const std::vector<cpl::PlanEntry> plan = cpl::refinement_plan(cfg);
        benchmark::DoNotOptimize(plan.size());
    }
}
BENCHMARK(BM_RefinementPlan)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
