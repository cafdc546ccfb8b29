#include "cpl/errors.hpp"
#include "cpl/layout_init.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace cpl;
using namespace cpl_test;

namespace {

CameraModel search_camera(int resolution = 128) {
    CameraModel cam;
    cam.width = cam.height = resolution;
    cam.pose = Pose{0.0, 0.0, camera_radius_for_extent(1.0, cam.fov_deg)};
    return cam;
}

PoseGrid default_grid() {
    return build_pose_grid(10.0, -30.0, 60.0, search_camera().pose.radius);
}

DepthInput two_instance_depth(double mean_a, double mean_b) {
    DepthInput input;
    input.depth = GrayImage{8, 8, std::vector<double>(64, 0.0)};
    MaskImage a{8, 8, std::vector<std::uint8_t>(64, 0)};
    MaskImage b = a;
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 4; ++x) {
            a.values[a.index(x, y)] = 1;
            input.depth.values[a.index(x, y)] = mean_a;
        }
        for (int x = 4; x < 8; ++x) {
            b.values[b.index(x, y)] = 1;
            input.depth.values[b.index(x, y)] = mean_b;
        }
    }
    input.masks = {a, b};
    return input;
}

} // namespace

TEST_CASE("init_scale is the width ratio of the prompt-1 bottle box") {
    const BBox2D box{24, 136, 168, 424}; // width 144
    CHECK(init_scale(box, 460.0) == 144.0 / 460.0);
    CHECK(init_scale(box, 460.0) == doctest::Approx(0.31304).epsilon(1e-4));
}

TEST_CASE("init_scale of equal widths is exactly one") {
    CHECK(init_scale(BBox2D{0, 0, 460, 100}, 460.0) == 1.0);
}

TEST_CASE("init_scale guards against non-positive widths") {
    CHECK_THROWS_AS((void)init_scale(BBox2D{0, 0, 100, 100}, 0.0), ValidationError);
    CHECK_THROWS_AS((void)init_scale(BBox2D{100, 0, 10, 100}, 460.0), ValidationError);
}

TEST_CASE("postprocessed width of the default canvas is 460") {
    CHECK(postprocessed_width(512, 0.9) == 460.0);
}

TEST_CASE("init_translation_xy maps the full-canvas box to the origin") {
    const auto [x, y] = init_translation_xy(BBox2D{0, 0, 512, 512}, 512, 512);
    CHECK(x == 0.0);
    CHECK(y == 0.0);
}

TEST_CASE("init_translation_xy on the prompt-1 bottle box") {
    const auto [x, y] = init_translation_xy(BBox2D{24, 136, 168, 424}, 512, 512);
    CHECK(x == -0.625);
    CHECK(y == -0.09375);
}

TEST_CASE("the bottom-right canvas corner maps to (1, -1)") {
    const auto [x, y] = canvas_to_scene_xy(512.0, 512.0, 512, 512);
    CHECK(x == 1.0);
    CHECK(y == -1.0);
}

TEST_CASE("init_translation_xy rejects boxes outside the canvas") {
    CHECK_THROWS_AS((void)init_translation_xy(BBox2D{-4, 0, 100, 100}, 512, 512),
                    ValidationError);
    CHECK_THROWS_AS((void)init_translation_xy(BBox2D{0, 0, 513, 100}, 512, 512),
                    ValidationError);
}

TEST_CASE("init_translation_xy is translation-equivariant") {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 40; ++trial) {
        const double x1 = uniform(rng, 0, 200);
        const double y1 = uniform(rng, 0, 200);
        const BBox2D box{x1, y1, x1 + 50, y1 + 80};
        const double dx = uniform(rng, 0, 200);
        const BBox2D moved{box.x1 + dx, box.y1, box.x2 + dx, box.y2};
        const auto [x_a, y_a] = init_translation_xy(box, 512, 512);
        const auto [x_b, y_b] = init_translation_xy(moved, 512, 512);
        CHECK(std::abs((x_b - x_a) - 2.0 * dx / 512.0) <= 1e-12);
        CHECK(y_b == y_a);
    }
}

TEST_CASE("init_depth_z maps a lone instance to the span midpoint") {
    DepthInput input;
    input.depth = GrayImage{4, 4, std::vector<double>(16, 0.7)};
    input.masks = {MaskImage{4, 4, std::vector<std::uint8_t>(16, 1)}};
    CHECK(init_depth_z(input, 0) == 0.0);
}

TEST_CASE("init_depth_z maps a two-instance span to +1/-1, nearer larger") {
    const DepthInput input = two_instance_depth(0.2, 0.8);
    CHECK(init_depth_z(input, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(init_depth_z(input, 1) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("masked mean depth matches a per-pixel summation oracle") {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 30; ++trial) {
        const int w = 12, h = 9;
        GrayImage depth{w, h, {}};
        MaskImage mask{w, h, {}};
        for (int i = 0; i < w * h; ++i) {
            depth.values.push_back(uniform(rng, 0.0, 5.0));
            mask.values.push_back(rng() % 4 == 0 ? 1 : 0);
        }
        if (mask.set_count() == 0) {
            mask.values[0] = 1;
        }
        double acc = 0.0;
        std::size_t n = 0;
        for (int i = 0; i < w * h; ++i) {
            if (mask.values[i] != 0) {
                acc += depth.values[i];
                ++n;
            }
        }
        CHECK(std::abs(masked_mean_depth(depth, mask) - acc / static_cast<double>(n)) <= 1e-12);
    }
}

TEST_CASE("init_depth_z preserves the nearer-larger ordering") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = uniform(rng, 0.05, 0.95);
        double b = uniform(rng, 0.05, 0.95);
        if (std::abs(a - b) < 1e-6) {
            b += 0.1;
        }
        const DepthInput input = two_instance_depth(a, b);
        const double za = init_depth_z(input, 0);
        const double zb = init_depth_z(input, 1);
        if (a < b) {
            CHECK(za > zb);
        } else {
            CHECK(zb > za);
        }
    }
}

TEST_CASE("init_depth_z rejects an empty mask") {
    DepthInput input;
    input.depth = GrayImage{4, 4, std::vector<double>(16, 0.5)};
    input.masks = {MaskImage{4, 4, std::vector<std::uint8_t>(16, 0)}};
    CHECK_THROWS_AS((void)init_depth_z(input, 0), ValidationError);
}

TEST_CASE("pose grid with 10-degree step and [-30, 60] elevation has 360 poses") {
    const PoseGrid grid = default_grid();
    CHECK(grid.poses.size() == 360);
    bool has_reference = false;
    for (const Pose& p : grid.poses) {
        if (p.elevation_deg == 0.0 && p.azimuth_deg == 0.0) {
            has_reference = true;
        }
    }
    CHECK(has_reference);
}

TEST_CASE("pose grid with 90-degree step and flat elevation has 4 poses") {
    const PoseGrid grid = build_pose_grid(90.0, 0.0, 0.0, 3.0);
    REQUIRE(grid.poses.size() == 4);
    CHECK(grid.poses[0].azimuth_deg == 0.0);
    CHECK(grid.poses[3].azimuth_deg == 270.0);
}

TEST_CASE("pose grid rejects steps that do not divide the circle") {
    CHECK_THROWS_AS((void)build_pose_grid(7.0, -30.0, 60.0, 3.0), ValidationError);
}

TEST_CASE("pose grid rejects elevation ranges missing zero") {
    CHECK_THROWS_AS((void)build_pose_grid(10.0, 5.0, 45.0, 3.0), ValidationError);
    CHECK_THROWS_AS((void)build_pose_grid(10.0, -45.0, -10.0, 3.0), ValidationError);
}

TEST_CASE("estimate_rotation recovers an exact grid pose with similarity 1") {
    std::mt19937_64 rng(54);
    const GaussianCloud cloud = asymmetric_blob(rng);
    const PoseGrid grid = default_grid();
    const SilhouetteDepthExtractor extractor;
    CameraModel cam = search_camera();

    cam.pose = Pose{0.0, 40.0, cam.pose.radius};
    const FeatureVec reference = extractor.extract(render(cloud, cam));

    const RotationEstimate est = estimate_rotation(cloud, reference, grid, extractor, cam);
    CHECK(est.pose.elevation_deg == 0.0);
    CHECK(est.pose.azimuth_deg == 40.0);
    CHECK(est.similarity == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("estimate_rotation matches an independent exhaustive argmax") {
    std::mt19937_64 rng(55);
    const GaussianCloud cloud = asymmetric_blob(rng);
    const PoseGrid grid = build_pose_grid(30.0, -30.0, 30.0, search_camera().pose.radius);
    const SilhouetteDepthExtractor extractor;
    const CameraModel cam = search_camera();

    CameraModel ref_cam = cam;
    ref_cam.pose = Pose{17.0, 203.0, cam.pose.radius}; // off-grid reference
    const FeatureVec reference = extractor.extract(render(cloud, ref_cam));

    // independent loop with its own cosine
    std::size_t best_idx = 0;
    double best_sim = -2.0;
    for (std::size_t j = 0; j < grid.poses.size(); ++j) {
        CameraModel c = cam;
        c.pose = grid.poses[j];
        const FeatureVec f = extractor.extract(render(cloud, c));
        double dot = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            dot += f.values[i] * reference.values[i];
            na += f.values[i] * f.values[i];
            nb += reference.values[i] * reference.values[i];
        }
        const double sim = dot / std::sqrt(na * nb);
        if (sim > best_sim) {
            best_sim = sim;
            best_idx = j;
        }
    }

    const RotationEstimate est = estimate_rotation(cloud, reference, grid, extractor, cam);
    CHECK(est.pose.elevation_deg == grid.poses[best_idx].elevation_deg);
    CHECK(est.pose.azimuth_deg == grid.poses[best_idx].azimuth_deg);
    CHECK(est.similarity == doctest::Approx(best_sim).epsilon(1e-12));
}

TEST_CASE("a rotationally symmetric cloud resolves to the first grid pose") {
    GaussianCloud sphere;
    sphere.points = {Vec3(0, 0, 0)};
    sphere.radii = {0.5};
    sphere.opacities = {1.0};
    sphere.colors = {Vec3(0.5, 0.5, 0.5)};
    const PoseGrid grid = default_grid();
    const SilhouetteDepthExtractor extractor;
    const CameraModel cam = search_camera();
    CameraModel ref_cam = cam;
    ref_cam.pose = Pose{30.0, 120.0, cam.pose.radius};
    const FeatureVec reference = extractor.extract(render(sphere, ref_cam));

    const RotationEstimate est = estimate_rotation(sphere, reference, grid, extractor, cam);
    CHECK(est.pose.elevation_deg == grid.poses.front().elevation_deg);
    CHECK(est.pose.azimuth_deg == grid.poses.front().azimuth_deg);
}

TEST_CASE("off-grid azimuth lands on a neighboring grid azimuth") {
    std::mt19937_64 rng(56);
    const GaussianCloud cloud = asymmetric_blob(rng);
    const PoseGrid grid = default_grid();
    const SilhouetteDepthExtractor extractor;
    const CameraModel cam = search_camera();
    CameraModel ref_cam = cam;
    ref_cam.pose = Pose{0.0, 37.0, cam.pose.radius};
    const FeatureVec reference = extractor.extract(render(cloud, ref_cam));

    const RotationEstimate est = estimate_rotation(cloud, reference, grid, extractor, cam);
    CHECK(azimuth_distance_deg(est.pose.azimuth_deg, 37.0) <= 10.0);
}

TEST_CASE("extractor failures carry the offending pose") {
    GaussianCloud ghost;
    ghost.points = {Vec3(0, 0, 0)};
    ghost.radii = {0.1};
    ghost.opacities = {0.1}; // below the render threshold: empty silhouette
    ghost.colors = {Vec3(0.5, 0.5, 0.5)};
    const PoseGrid grid = build_pose_grid(90.0, 0.0, 0.0, 3.0);
    const SilhouetteDepthExtractor extractor;
    FeatureVec dummy;
    dummy.descriptor_id = kSilhouetteDepthDescriptorId;
    dummy.values.assign(517, 0.1);
    try {
        (void)estimate_rotation(ghost, dummy, grid, extractor, search_camera());
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("pose") != std::string::npos);
    }
}

TEST_CASE("crop_and_recenter centers the masked object at the requested fill") {
    const int side = 64;
    GrayImage depth{100, 80, std::vector<double>(8000, 2.0)};
    MaskImage mask{100, 80, std::vector<std::uint8_t>(8000, 0)};
    // 20x10 rectangle in the top-left corner
    for (int y = 5; y < 15; ++y) {
        for (int x = 10; x < 30; ++x) {
            mask.values[mask.index(x, y)] = 1;
        }
    }
    const RenderBuffers out = crop_and_recenter(mask, depth, side, 0.9);
    validate(out);
    CHECK(out.width == side);
    CHECK(out.height == side);

    // the long axis (20 px) should span ~0.9 * 64 pixels, centered
    int x_min = side, x_max = -1, y_min = side, y_max = -1;
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            if (out.foreground(x, y)) {
                x_min = std::min(x_min, x);
                x_max = std::max(x_max, x);
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        }
    }
    CHECK(x_max - x_min + 1 == doctest::Approx(0.9 * side).epsilon(0.05));
    CHECK((x_min + x_max) / 2 == doctest::Approx(side / 2).epsilon(0.05));
    CHECK((y_min + y_max) / 2 == doctest::Approx(side / 2).epsilon(0.05));
    // aspect preserved: height is half the width
    CHECK(y_max - y_min + 1 == doctest::Approx(0.45 * side).epsilon(0.08));
}

TEST_CASE("crop_and_recenter rejects an empty mask") {
    GrayImage depth{8, 8, std::vector<double>(64, 1.0)};
    MaskImage mask{8, 8, std::vector<std::uint8_t>(64, 0)};
    CHECK_THROWS_AS((void)crop_and_recenter(mask, depth, 32), ValidationError);
}

TEST_CASE("depth input validation") {
    DepthInput input;
    input.depth = GrayImage{4, 4, std::vector<double>(16, 1.0)};
    input.masks = {MaskImage{5, 4, std::vector<std::uint8_t>(20, 1)}};
    CHECK_THROWS_AS(validate(input), ValidationError); // dims mismatch

    input.masks = {MaskImage{4, 4, std::vector<std::uint8_t>(16, 1)}};
    input.depth.values[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(input), ValidationError); // non-finite under mask
}
