/*
 * Copyright 2026 The CompoLayout Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cpl/scene_model.hpp"

#include "cpl/errors.hpp"

#include <cmath>
#include <unordered_set>

namespace cpl {

namespace {

    [[nodiscard]] bool finite(const Vec3& v) {
        return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
    }

    constexpr double kQuatNormTol = 1e-9;

} // namespace

void validate(const GaussianCloud& cloud) {
    const std::size_t k = cloud.points.size();
    if (k == 0) {
        throw ValidationError("validation/empty-cloud", "cloud must contain at least one point");
    }
    if (cloud.radii.size() != k || cloud.opacities.size() != k || cloud.colors.size() != k) {
        throw ValidationError("validation/cloud-attribute-size",
                              "radii/opacities/colors must match the point count");
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (!finite(cloud.points[i])) {
            throw ValidationError("validation/non-finite-point",
                                  "point " + std::to_string(i) + " is not finite");
        }
        if (!(cloud.radii[i] > 0.0) || !std::isfinite(cloud.radii[i])) {
            throw ValidationError("validation/non-positive-radius",
                                  "radius " + std::to_string(i) + " must be positive");
        }
        if (!(cloud.opacities[i] >= 0.0 && cloud.opacities[i] <= 1.0)) {
            throw ValidationError("validation/opacity-range",
                                  "opacity " + std::to_string(i) + " outside [0,1]");
        }
        const Vec3& c = cloud.colors[i];
        if (!(c.minCoeff() >= 0.0 && c.maxCoeff() <= 1.0)) {
            throw ValidationError("validation/color-range",
                                  "color " + std::to_string(i) + " outside [0,1]^3");
        }
    }
}

void validate(const InstanceTransform& xf) {
    if (!(xf.scale > 0.0) || !std::isfinite(xf.scale)) {
        throw ValidationError("validation/non-positive-scale", "transform scale must be positive");
    }
    if (std::abs(xf.rotation.norm() - 1.0) > kQuatNormTol) {
        throw ValidationError("validation/quaternion-norm", "rotation quaternion is not unit length");
    }
    if (!finite(xf.translation)) {
        throw ValidationError("validation/non-finite-translation", "translation is not finite");
    }
}

void validate(const Pose& pose) {
    if (!(pose.elevation_deg >= -90.0 && pose.elevation_deg <= 90.0)) {
        throw ValidationError("validation/elevation-range", "elevation outside [-90, 90] degrees");
    }
    if (!(pose.azimuth_deg >= 0.0 && pose.azimuth_deg < 360.0)) {
        throw ValidationError("validation/azimuth-range", "azimuth outside [0, 360) degrees");
    }
    if (!(pose.radius > 0.0) || !std::isfinite(pose.radius)) {
        throw ValidationError("validation/camera-radius", "camera radius must be positive and finite");
    }
}

void validate(const BBox2D& box) {
    if (!(box.x1 < box.x2) || !(box.y1 < box.y2)) {
        throw ValidationError("validation/bbox-degenerate",
                              "bbox requires x1 < x2 and y1 < y2");
    }
}

void validate(const LayoutSpec& layout) {
    if (layout.canvas_width < 1 || layout.canvas_height < 1) {
        throw ValidationError("validation/canvas-size", "canvas must be at least 1x1");
    }
    if (layout.entries.empty()) {
        throw ValidationError("validation/empty-layout", "layout must contain at least one entry");
    }
    for (std::size_t i = 0; i < layout.entries.size(); ++i) {
        const BBox2D& b = layout.entries[i].bbox;
        validate(b);
        if (b.x1 < 0.0 || b.y1 < 0.0 || b.x2 > layout.canvas_width || b.y2 > layout.canvas_height) {
            throw ValidationError("validation/bbox-out-of-canvas",
                                  "entry " + std::to_string(i) + " bbox exceeds the canvas");
        }
    }
}

void validate(const Scene& scene) {
    if (scene.instances.empty()) {
        throw ValidationError("validation/empty-scene", "scene must contain at least one instance");
    }
    std::unordered_set<std::string> ids;
    for (const SceneInstance& inst : scene.instances) {
        if (!ids.insert(inst.id).second) {
            throw ValidationError("validation/duplicate-instance-id",
                                  "duplicate instance id '" + inst.id + "'");
        }
        validate(inst.cloud);
        validate(inst.transform);
    }
}

GaussianCloud apply_transform(const GaussianCloud& cloud, const InstanceTransform& xf) {
    GaussianCloud out = cloud;
    const Mat3 rot = xf.rotation.toRotationMatrix();
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        out.points[i] = xf.scale * (rot * cloud.points[i]) + xf.translation;
        out.radii[i] = cloud.radii[i] * xf.scale;
        if (!finite(out.points[i]) || !std::isfinite(out.radii[i])) {
            throw NumericError("numeric/transform-overflow",
                               "non-finite result while transforming point " + std::to_string(i));
        }
    }
    return out;
}

InstanceTransform compose(const InstanceTransform& b, const InstanceTransform& a) {
    InstanceTransform out;
    out.scale = b.scale * a.scale;
    out.rotation = (b.rotation * a.rotation).normalized();
    out.translation = b.scale * (b.rotation * a.translation) + b.translation;
    return out;
}

NormalizedCloud normalize_cloud(const GaussianCloud& cloud) {
    if (cloud.points.empty()) {
        throw ValidationError("validation/empty-cloud", "cannot normalize an empty cloud");
    }
    Vec3 center = Vec3::Zero();
    for (const Vec3& p : cloud.points) {
        center += p;
    }
    center /= static_cast<double>(cloud.points.size());

    double extent = 0.0;
    for (const Vec3& p : cloud.points) {
        extent = std::max(extent, (p - center).norm());
    }
    if (extent <= 0.0) {
        throw NumericError("numeric/zero-extent", "all points coincide; extent is zero");
    }

    NormalizedCloud out{cloud, center, extent};
    const double inv = 1.0 / extent;
    for (std::size_t i = 0; i < out.cloud.points.size(); ++i) {
        out.cloud.points[i] = (out.cloud.points[i] - center) * inv;
        out.cloud.radii[i] *= inv;
    }
    return out;
}

GaussianCloud compose_scene(const Scene& scene) {
    validate(scene);
    GaussianCloud out;
    for (const SceneInstance& inst : scene.instances) {
        const GaussianCloud placed = apply_transform(inst.cloud, inst.transform);
        out.points.insert(out.points.end(), placed.points.begin(), placed.points.end());
        out.radii.insert(out.radii.end(), placed.radii.begin(), placed.radii.end());
        out.opacities.insert(out.opacities.end(), placed.opacities.begin(), placed.opacities.end());
        out.colors.insert(out.colors.end(), placed.colors.begin(), placed.colors.end());
    }
    return out;
}

std::vector<Vec3> world_points(const SceneInstance& instance) {
    std::vector<Vec3> out;
    out.reserve(instance.cloud.points.size());
    const Mat3 rot = instance.transform.rotation.toRotationMatrix();
    for (const Vec3& p : instance.cloud.points) {
        out.push_back(instance.transform.scale * (rot * p) + instance.transform.translation);
    }
    return out;
}

} // namespace cpl
