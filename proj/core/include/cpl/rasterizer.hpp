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

#include "cpl/scene_model.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace cpl {

// Background sentinel for depth pixels; everything that reduces over depth
// must mask by the silhouette first.
inline constexpr double kDepthBackground = std::numeric_limits<double>::infinity();

// Silhouette / depth / normal buffers for one view, row-major, origin at the
// top-left pixel. Foreground pixels satisfy: silhouette == 1, finite depth,
// unit normal. Background pixels: silhouette == 0, depth == +inf, normal 0.
struct RenderBuffers {
    int width{0};
    int height{0};
    std::vector<std::uint8_t> silhouette;
    std::vector<double> depth;
    std::vector<Vec3> normal;

    [[nodiscard]] std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    [[nodiscard]] bool foreground(int x, int y) const { return silhouette[index(x, y)] != 0; }
    [[nodiscard]] std::size_t foreground_count() const;
};

// Allocates background-initialized buffers.
[[nodiscard]] RenderBuffers make_buffers(int width, int height);

// Throws ValidationError if the foreground/background coupling or the unit
// normal invariant (1e-6) is broken.
void validate(const RenderBuffers& buffers);

// Pinhole orbit camera. fov_deg is the vertical field of view.
struct CameraModel {
    Pose pose;
    double fov_deg{45.0};
    int width{256};
    int height{256};
};

void validate(const CameraModel& cam);

// Camera distance at which a sphere of `extent` fills `fill` of the image
// height; the library default is fill = 0.8 for a unit-extent object.
[[nodiscard]] double camera_radius_for_extent(double extent, double fov_deg, double fill = 0.8);

// World-from-camera rotation of the orbit pose: R_y(azimuth) * R_x(-elevation).
// The camera sits at R * (0, 0, radius) and looks at the origin, y up.
[[nodiscard]] Quat camera_rotation(const Pose& pose);

// Object rotation that reproduces, at the reference view (elevation 0,
// azimuth 0), what the camera at `pose` sees: the inverse camera rotation.
[[nodiscard]] Quat pose_to_object_rotation(const Pose& pose);

// Hard-edged z-buffered point splatting.
//
// Every point with opacity >= 0.5 projects to a screen-space disc of its
// scaled radius; the nearest point wins each pixel (ties broken by lower
// point index, so output is bit-deterministic). Depth is the Euclidean
// camera-space distance of the winning point. Normals are derived from the
// depth buffer via normals_from_depth. A cloud entirely outside the frustum
// yields empty buffers; NaN coordinates throw ValidationError.
[[nodiscard]] RenderBuffers render(const GaussianCloud& cloud, const CameraModel& cam);

// Fills the normal buffer from central finite differences of depth:
// n = normalize(dd/du, -dd/dv, 1) in the camera frame (u right, v down,
// slopes in depth units per pixel). One-sided differences at silhouette
// borders; isolated pixels get the view direction (0, 0, 1).
[[nodiscard]] RenderBuffers normals_from_depth(RenderBuffers buffers);

} // namespace cpl
