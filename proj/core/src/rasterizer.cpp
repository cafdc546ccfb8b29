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

#include "cpl/rasterizer.hpp"

#include "cpl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cpl {

namespace {

    constexpr double kNearClip = 1e-9;
    constexpr double kOpacityThreshold = 0.5;
    constexpr double kNormalUnitTol = 1e-6;

} // namespace

std::size_t RenderBuffers::foreground_count() const {
    std::size_t n = 0;
    for (std::uint8_t s : silhouette) {
        n += (s != 0);
    }
    return n;
}

RenderBuffers make_buffers(int width, int height) {
    RenderBuffers out;
    out.width = width;
    out.height = height;
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    out.silhouette.assign(n, 0);
    out.depth.assign(n, kDepthBackground);
    out.normal.assign(n, Vec3::Zero());
    return out;
}

void validate(const RenderBuffers& buffers) {
    const std::size_t n = static_cast<std::size_t>(buffers.width) * static_cast<std::size_t>(buffers.height);
    if (buffers.silhouette.size() != n || buffers.depth.size() != n || buffers.normal.size() != n) {
        throw ValidationError("validation/buffer-size", "buffer planes do not match width*height");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const bool fg = buffers.silhouette[i] != 0;
        const bool has_depth = std::isfinite(buffers.depth[i]);
        const bool has_normal = buffers.normal[i].squaredNorm() > 0.0;
        if (fg != has_depth || fg != has_normal) {
            throw ValidationError("validation/buffer-coupling",
                                  "silhouette/depth/normal disagree at pixel " + std::to_string(i));
        }
        if (fg && std::abs(buffers.normal[i].norm() - 1.0) > kNormalUnitTol) {
            throw ValidationError("validation/non-unit-normal",
                                  "foreground normal not unit length at pixel " + std::to_string(i));
        }
    }
}

void validate(const CameraModel& cam) {
    validate(cam.pose);
    if (!(cam.fov_deg > 0.0 && cam.fov_deg < 180.0)) {
        throw ValidationError("validation/fov-range", "fov must lie in (0, 180) degrees");
    }
    if (cam.width < 8 || cam.height < 8) {
        throw ValidationError("validation/image-dims", "image must be at least 8x8");
    }
}

double camera_radius_for_extent(double extent, double fov_deg, double fill) {
    return extent / (fill * std::tan(0.5 * deg_to_rad(fov_deg)));
}

Quat camera_rotation(const Pose& pose) {
    return rot_y_deg(pose.azimuth_deg) * rot_x_deg(-pose.elevation_deg);
}

Quat pose_to_object_rotation(const Pose& pose) {
    return camera_rotation(pose).conjugate();
}

RenderBuffers render(const GaussianCloud& cloud, const CameraModel& cam) {
    validate(cloud);
    validate(cam);

    RenderBuffers out = make_buffers(cam.width, cam.height);
    std::vector<std::int64_t> winner(out.depth.size(), -1);

    const Quat cam_rot = camera_rotation(cam.pose);
    const Mat3 world_to_cam = cam_rot.conjugate().toRotationMatrix();
    const Vec3 cam_pos = cam_rot * Vec3(0.0, 0.0, cam.pose.radius);

    const double focal = 0.5 * cam.height / std::tan(0.5 * deg_to_rad(cam.fov_deg));
    const double cx = 0.5 * cam.width;
    const double cy = 0.5 * cam.height;

    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        if (cloud.opacities[i] < kOpacityThreshold) {
            continue;
        }
        const Vec3 pc = world_to_cam * (cloud.points[i] - cam_pos);
        const double z = -pc.z(); // distance along the view axis
        if (z <= kNearClip) {
            continue;
        }
        const double u = cx + focal * pc.x() / z;
        const double v = cy - focal * pc.y() / z;
        const double screen_radius = focal * cloud.radii[i] / z;
        const double dist = pc.norm();

        const int x_lo = std::max(0, static_cast<int>(std::floor(u - screen_radius - 0.5)));
        const int x_hi = std::min(cam.width - 1, static_cast<int>(std::ceil(u + screen_radius - 0.5)));
        const int y_lo = std::max(0, static_cast<int>(std::floor(v - screen_radius - 0.5)));
        const int y_hi = std::min(cam.height - 1, static_cast<int>(std::ceil(v + screen_radius - 0.5)));
        const double r2 = screen_radius * screen_radius;

        for (int y = y_lo; y <= y_hi; ++y) {
            const double dy = (y + 0.5) - v;
            for (int x = x_lo; x <= x_hi; ++x) {
                const double dx = (x + 0.5) - u;
                if (dx * dx + dy * dy > r2) {
                    continue;
                }
                const std::size_t px = out.index(x, y);
                if (dist < out.depth[px] ||
                    (dist == out.depth[px] && static_cast<std::int64_t>(i) < winner[px])) {
                    out.depth[px] = dist;
                    out.silhouette[px] = 1;
                    winner[px] = static_cast<std::int64_t>(i);
                }
            }
        }
    }

    return normals_from_depth(std::move(out));
}

RenderBuffers normals_from_depth(RenderBuffers buffers) {
    const int w = buffers.width;
    const int h = buffers.height;

    auto fg = [&](int x, int y) {
        return x >= 0 && x < w && y >= 0 && y < h && buffers.silhouette[buffers.index(x, y)] != 0;
    };
    auto d = [&](int x, int y) { return buffers.depth[buffers.index(x, y)]; };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t px = buffers.index(x, y);
            if (buffers.silhouette[px] == 0) {
                buffers.normal[px] = Vec3::Zero();
                continue;
            }
            double du = 0.0;
            if (fg(x - 1, y) && fg(x + 1, y)) {
                du = 0.5 * (d(x + 1, y) - d(x - 1, y));
            } else if (fg(x + 1, y)) {
                du = d(x + 1, y) - d(x, y);
            } else if (fg(x - 1, y)) {
                du = d(x, y) - d(x - 1, y);
            }
            double dv = 0.0;
            if (fg(x, y - 1) && fg(x, y + 1)) {
                dv = 0.5 * (d(x, y + 1) - d(x, y - 1));
            } else if (fg(x, y + 1)) {
                dv = d(x, y + 1) - d(x, y);
            } else if (fg(x, y - 1)) {
                dv = d(x, y) - d(x, y - 1);
            }
            buffers.normal[px] = Vec3(du, -dv, 1.0).normalized();
        }
    }
    return buffers;
}

} // namespace cpl
