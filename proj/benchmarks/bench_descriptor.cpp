#include <benchmark/benchmark.h>

#include "cpl/guidance.hpp"
#include "cpl/rasterizer.hpp"

#include <random>

namespace {

cpl::RenderBuffers make_view(int side) {
    std::mt19937_64 rng(13);
    auto u = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    cpl::GaussianCloud cloud;
    for (int i = 0; i < 1500; ++i) {
        cloud.points.emplace_back(u(-1, 1), u(-1, 1), u(-1, 1));
        cloud.radii.push_back(0.05);
        cloud.opacities.push_back(1.0);
        cloud.colors.emplace_back(0.5, 0.5, 0.5);
    }
    cpl::CameraModel cam;
    cam.width = cam.height = side;
    cam.pose = cpl::Pose{10.0, 70.0, cpl::camera_radius_for_extent(1.8, cam.fov_deg)};
    return cpl::render(cloud, cam);
}

} // namespace

static void BM_ExtractDescriptor(benchmark::State& state) {
    const cpl::RenderBuffers view = make_view(static_cast<int>(state.range(0)));
    const cpl::SilhouetteDepthExtractor extractor;
    for (auto _ : state) {
        const cpl::FeatureVec f = extractor.extract(view);
        benchmark::DoNotOptimize(f.values.data());
    }
}
BENCHMARK(BM_ExtractDescriptor)->Arg(128)->Arg(256);

static void BM_ReferenceLoss(benchmark::State& state) {
    const cpl::RenderBuffers view = make_view(128);
    const cpl::SilhouetteDepthExtractor extractor;
    const cpl::FeatureVec a = extractor.extract(view);
    cpl::FeatureVec b = a;
    b.values[3] += 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cpl::reference_loss(a, b, 10.0));
    }
}
BENCHMARK(BM_ReferenceLoss);

static void BM_TvLoss(benchmark::State& state) {
    const cpl::RenderBuffers view = make_view(static_cast<int>(state.range(0)));
    const cpl::MaskImage mask = cpl::silhouette_mask(view);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cpl::tv_loss(std::span<const double>(view.depth), mask));
    }
}
BENCHMARK(BM_TvLoss)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
