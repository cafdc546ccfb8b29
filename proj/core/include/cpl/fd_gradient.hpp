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

#include <functional>

namespace cpl {

// Scene with one instance's rotation perturbed by exp(step * axis_j) * q
// (coord 0..2) or translation shifted along axis coord-3 (coord 3..5).
[[nodiscard]] inline Scene perturb_instance(Scene scene, std::size_t instance, int coord,
                                            double step) {
    InstanceTransform& xf = scene.instances[instance].transform;
    if (coord < 3) {
        Vec3 w = Vec3::Zero();
        w[coord] = step;
        xf.rotation = (quat_exp(w) * xf.rotation).normalized();
    } else {
        xf.translation[coord - 3] += step;
    }
    return scene;
}

// Central finite differences of a scalar scene functional w.r.t. one
// instance's rotation tangent and translation (scale left untouched).
[[nodiscard]] inline TransformGrad fd_transform_gradient(
    const Scene& scene, std::size_t instance,
    const std::function<double(const Scene&)>& loss, double step) {
    TransformGrad grad;
    for (int coord = 0; coord < 6; ++coord) {
        const double plus = loss(perturb_instance(scene, instance, coord, step));
        const double minus = loss(perturb_instance(scene, instance, coord, -step));
        const double g = (plus - minus) / (2.0 * step);
        if (coord < 3) {
            grad.rotation[coord] = g;
        } else {
            grad.translation[coord - 3] = g;
        }
    }
    return grad;
}

} // namespace cpl
