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

#pragma once

#include "cpl/geometry.hpp"

#include <string>
#include <vector>

namespace cpl {

// Set of isotropic point splats: positions with per-point radius, opacity
// and RGB color. This is the unit everything else composes: one instance's
// geometry, or a whole scene flattened into world space.
//
// Invariants (checked by validate()): at least one point, finite
// coordinates, radii > 0, opacities and colors in [0, 1].
struct GaussianCloud {
    std::vector<Vec3> points;
    std::vector<double> radii;
    std::vector<double> opacities;
    std::vector<Vec3> colors;

    [[nodiscard]] std::size_t size() const { return points.size(); }
};

// Throws ValidationError if any invariant is broken.
void validate(const GaussianCloud& cloud);

// Per-instance placement: p_world = scale * rotate(rotation, p) + translation.
// scale > 0; rotation stays unit-norm (within 1e-9) after every update.
struct InstanceTransform {
    double scale{1.0};
    Quat rotation{Quat::Identity()};
    Vec3 translation{Vec3::Zero()};
};

void validate(const InstanceTransform& xf);

// Tangent of InstanceTransform: the gradient layout shared by the collision
// module, the guidance slot and the optimizer. `rotation` is a world-frame
// axis-angle (left-multiplicative) 3-vector.
struct TransformGrad {
    Vec3 rotation{Vec3::Zero()};
    Vec3 translation{Vec3::Zero()};
    double scale{0.0};
};

// Orbit camera coordinates: elevation in [-90, 90] degrees, azimuth in
// [0, 360) degrees, radius > 0. Azimuth 0 / elevation 0 is the reference
// view: camera on +z looking down -z, y up.
struct Pose {
    double elevation_deg{0.0};
    double azimuth_deg{0.0};
    double radius{1.0};
};

void validate(const Pose& pose);

// Axis-aligned pixel box, [x1, y1, x2, y2] with x1 < x2, y1 < y2.
struct BBox2D {
    double x1{0.0}, y1{0.0}, x2{0.0}, y2{0.0};

    [[nodiscard]] double width() const { return x2 - x1; }
    [[nodiscard]] double height() const { return y2 - y1; }
    [[nodiscard]] double center_x() const { return 0.5 * (x1 + x2); }
    [[nodiscard]] double center_y() const { return 0.5 * (y1 + y2); }
};

void validate(const BBox2D& box);

struct LayoutEntry {
    BBox2D bbox;
    std::string label;
};

// Ordered 2D layout over a pixel canvas plus the global prompt.
struct LayoutSpec {
    int canvas_width{512};
    int canvas_height{512};
    std::vector<LayoutEntry> entries;
    std::string prompt;
};

// Checks entry list non-empty and every bbox valid and inside the canvas.
void validate(const LayoutSpec& layout);

// One placed instance: cloud in the canonical object frame (centered,
// unit extent) plus its transform.
struct SceneInstance {
    std::string id;
    GaussianCloud cloud;
    InstanceTransform transform;
    std::string label;
};

struct Scene {
    std::vector<SceneInstance> instances;
};

// ids unique, at least one instance, per-instance invariants hold.
void validate(const Scene& scene);

// p' = scale * R * p + t; radii scale multiplicatively; opacity/color kept.
// Throws NumericError if any output coordinate is non-finite.
[[nodiscard]] GaussianCloud apply_transform(const GaussianCloud& cloud, const InstanceTransform& xf);

// Composition such that apply(compose(b, a), p) == apply(b, apply(a, p)).
[[nodiscard]] InstanceTransform compose(const InstanceTransform& b, const InstanceTransform& a);

struct NormalizedCloud {
    GaussianCloud cloud; // centroid at origin, max distance from origin == 1
    Vec3 center;         // removed centroid
    double extent;       // original max distance from the centroid
};

// Canonicalizes a cloud: subtract the centroid, divide positions and radii
// by the max distance from the centroid. The returned (center, extent) pair
// inverts the mapping exactly. Throws NumericError when all points coincide.
[[nodiscard]] NormalizedCloud normalize_cloud(const GaussianCloud& cloud);

// World-space union of all instances, in instance order.
[[nodiscard]] GaussianCloud compose_scene(const Scene& scene);

// World-space positions of one instance (cheaper than apply_transform when
// only coordinates are needed, e.g. for the collision terms).
[[nodiscard]] std::vector<Vec3> world_points(const SceneInstance& instance);

} // namespace cpl
