// Shared generators and oracle helpers for the test suites.
#pragma once

#include "cpl/scene_model.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace cpl_test {

using cpl::GaussianCloud;
using cpl::InstanceTransform;
using cpl::Quat;
using cpl::Scene;
using cpl::SceneInstance;
using cpl::Vec3;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline Vec3 random_unit_vector(std::mt19937_64& rng) {
    for (;;) {
        const Vec3 v(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
        const double n = v.norm();
        if (n > 1e-3 && n <= 1.0) {
            return v / n;
        }
    }
}

inline Quat random_rotation(std::mt19937_64& rng) {
    const Vec3 axis = random_unit_vector(rng);
    const double angle = uniform(rng, 0.0, 2.0 * 3.14159265358979323846);
    return Quat(Eigen::AngleAxisd(angle, axis));
}

inline GaussianCloud random_cloud(std::mt19937_64& rng, std::size_t count, double extent = 1.0) {
    GaussianCloud cloud;
    for (std::size_t i = 0; i < count; ++i) {
        cloud.points.emplace_back(uniform(rng, -extent, extent), uniform(rng, -extent, extent),
                                  uniform(rng, -extent, extent));
        cloud.radii.push_back(uniform(rng, 0.01, 0.1));
        cloud.opacities.push_back(1.0);
        cloud.colors.emplace_back(uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0),
                                  uniform(rng, 0.0, 1.0));
    }
    return cloud;
}

// Uniform samples inside a unit ball (mean distance to center -> 3/4).
inline GaussianCloud solid_ball(std::mt19937_64& rng, std::size_t count, double radius = 1.0,
                                double splat_radius = 0.05) {
    GaussianCloud cloud;
    while (cloud.points.size() < count) {
        const Vec3 p(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
        if (p.squaredNorm() <= 1.0) {
            cloud.points.push_back(radius * p);
            cloud.radii.push_back(splat_radius);
            cloud.opacities.push_back(1.0);
            cloud.colors.emplace_back(0.5, 0.5, 0.5);
        }
    }
    return cloud;
}

// Clearly asymmetric blob: a few ellipsoidal clusters at distinct offsets,
// normalized to unit extent. Good for pose-recovery tests.
inline GaussianCloud asymmetric_blob(std::mt19937_64& rng, std::size_t count = 600) {
    const int clusters = 4;
    std::vector<Vec3> centers;
    std::vector<Vec3> axes;
    for (int c = 0; c < clusters; ++c) {
        centers.emplace_back(uniform(rng, -0.8, 0.8), uniform(rng, -0.8, 0.8),
                             uniform(rng, -0.8, 0.8));
        axes.emplace_back(uniform(rng, 0.1, 0.5), uniform(rng, 0.1, 0.5), uniform(rng, 0.1, 0.5));
    }
    GaussianCloud cloud;
    for (std::size_t i = 0; i < count; ++i) {
        const int c = static_cast<int>(rng() % clusters);
        const Vec3 p = centers[c] + Vec3(uniform(rng, -1.0, 1.0) * axes[c].x(),
                                         uniform(rng, -1.0, 1.0) * axes[c].y(),
                                         uniform(rng, -1.0, 1.0) * axes[c].z());
        cloud.points.push_back(p);
        cloud.radii.push_back(0.05);
        cloud.opacities.push_back(1.0);
        cloud.colors.emplace_back(0.5, 0.5, 0.5);
    }
    // normalize to unit extent around the centroid
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : cloud.points) {
        mean += p;
    }
    mean /= static_cast<double>(cloud.points.size());
    double extent = 0.0;
    for (const Vec3& p : cloud.points) {
        extent = std::max(extent, (p - mean).norm());
    }
    for (Vec3& p : cloud.points) {
        p = (p - mean) / extent;
    }
    return cloud;
}

inline InstanceTransform random_transform(std::mt19937_64& rng) {
    InstanceTransform xf;
    xf.scale = uniform(rng, 0.3, 2.5);
    xf.rotation = random_rotation(rng);
    xf.translation =
        Vec3(uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0));
    return xf;
}

inline Scene random_scene(std::mt19937_64& rng, std::size_t instances, std::size_t max_points,
                          double translation_span = 1.5) {
    Scene scene;
    for (std::size_t i = 0; i < instances; ++i) {
        SceneInstance inst;
        inst.id = std::to_string(i);
        inst.label = "instance-" + std::to_string(i);
        inst.cloud = random_cloud(rng, 20 + rng() % (max_points - 19));
        inst.transform.scale = uniform(rng, 0.4, 1.6);
        inst.transform.rotation = random_rotation(rng);
        inst.transform.translation = Vec3(uniform(rng, -translation_span, translation_span),
                                          uniform(rng, -translation_span, translation_span),
                                          uniform(rng, -translation_span, translation_span));
        scene.instances.push_back(std::move(inst));
    }
    return scene;
}

// Independent quaternion sandwich product p' = q p q^-1 on raw components,
// used as the rotation oracle.
inline Vec3 quat_rotate_oracle(const Quat& q, const Vec3& p) {
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    // t = 2 * cross(q.xyz, p)
    const double tx = 2.0 * (y * p.z() - z * p.y());
    const double ty = 2.0 * (z * p.x() - x * p.z());
    const double tz = 2.0 * (x * p.y() - y * p.x());
    // p' = p + w * t + cross(q.xyz, t)
    return Vec3(p.x() + w * tx + (y * tz - z * ty), p.y() + w * ty + (z * tx - x * tz),
                p.z() + w * tz + (x * ty - y * tx));
}

} // namespace cpl_test
