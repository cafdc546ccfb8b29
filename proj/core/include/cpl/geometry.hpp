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

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace cpl {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Mat3 = Eigen::Matrix3d;

[[nodiscard]] inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
[[nodiscard]] inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Rotation about +x by `deg`; R_x maps y toward z.
[[nodiscard]] inline Quat rot_x_deg(double deg) {
    return Quat(Eigen::AngleAxisd(deg_to_rad(deg), Vec3::UnitX()));
}

// Rotation about +y by `deg`; R_y maps z toward x, so R_y(a) * (0,0,1) = (sin a, 0, cos a).
[[nodiscard]] inline Quat rot_y_deg(double deg) {
    return Quat(Eigen::AngleAxisd(deg_to_rad(deg), Vec3::UnitY()));
}

[[nodiscard]] inline Quat rot_z_deg(double deg) {
    return Quat(Eigen::AngleAxisd(deg_to_rad(deg), Vec3::UnitZ()));
}

// Exponential map: world-frame axis-angle vector -> unit quaternion.
// Rotation tangent vectors throughout the library are understood as
// left-multiplicative perturbations q' = exp(w) * q.
[[nodiscard]] inline Quat quat_exp(const Vec3& w) {
    const double angle = w.norm();
    if (angle < 1e-300) {
        return Quat::Identity();
    }
    return Quat(Eigen::AngleAxisd(angle, w / angle));
}

// Wraps an azimuth difference to (-180, 180] and returns its magnitude.
[[nodiscard]] inline double azimuth_distance_deg(double a, double b) {
    double d = std::fmod(std::abs(a - b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

} // namespace cpl
