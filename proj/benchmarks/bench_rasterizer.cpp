#include <benchmark/benchmark.h>

#include "cpl/rasterizer.hpp"

#include <random>

namespace {

cpl::GaussianCloud make_cloud(int points) {
    std::mt19937_64 rng(7);
    auto u = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    cpl::GaussianCloud cloud;
    for (int i = 0; i < points; ++i) {
        cloud.points.emplace_back(u(-1, 1), u(-1, 1), u(-1, 1));
        cloud.radii.push_back(0.04);
        cloud.opacities.push_back(1.0);
        cloud.colors.emplace_back(0.5, 0.5, 0.5);
    }
    return cloud;
}

} // namespace

static void BM_Render(benchmark::State& state) {
    const cpl::GaussianCloud cloud = make_cloud(static_cast<int>(state.range(0)));
    cpl::CameraModel cam;
    cam.width = cam.height = static_cast<int>(state.range(1));
    cam.pose = cpl::Pose{0.0, 40.0, cpl::camera_radius_for_extent(1.8, cam.fov_deg)};
    for (auto _ : state) {
        const cpl::RenderBuffers buffers = cpl::render(cloud, cam);
        benchmark::DoNotOptimize(buffers.silhouette.data());
    }
}
BENCHMARK(BM_Render)->Args({500, 128})->Args({2000, 128})->Args({2000, 256})->Args({8000, 256});

static void BM_NormalsFromDepth(benchmark::State& state) {
    const cpl::GaussianCloud cloud = make_cloud(2000);
    cpl::CameraModel cam;
    cam.width = cam.height = static_cast<int>(state.range(0));
    cam.pose = cpl::Pose{0.0, 40.0, cpl::camera_radius_for_extent(1.8, cam.fov_deg)};
    const cpl::RenderBuffers buffers = cpl::render(cloud, cam);
    for (auto _ : state) {
        cpl::RenderBuffers out = cpl::normals_from_depth(buffers);
        benchmark::DoNotOptimize(out.normal.data());
    }
}
BENCHMARK(BM_NormalsFromDepth)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
