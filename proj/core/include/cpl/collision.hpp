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
#include <span>
#include <vector>

namespace cpl {

struct CollisionOptions {
    double lambda_c{0.2};

    // Add both orderings of each pair to the scene total. The one-directional
    // form only penalizes one instance intruding into the other's core.
    bool symmetrize{true};

    // Ignore the dependence of the anchor's mean and sparsity radius on its
    // own transform when differentiating (ablation mode).
    bool frozen_anchor{false};

    // 0 = exact. Otherwise instances with more points are uniformly
    // subsampled (seeded) before evaluating the loss.
    std::size_t max_points{0};
    std::uint64_t seed{0};
};

struct CollisionPairTerm {
    std::size_t anchor;   // instance providing mean and sparsity radius
    std::size_t intruder; // instance whose points are penalized
    double loss;
};

// Scene-level collision evaluation: per-ordered-pair losses, their sum, and
// the gradient of the sum w.r.t. each instance's transform.
struct CollisionReport {
    std::vector<CollisionPairTerm> pairs;
    double total{0.0};
    std::vector<TransformGrad> gradients; // one per instance, scene order
};

// Mean distance of the points to their coordinate mean (a soft radius of the
// mass distribution). A single point yields 0.
[[nodiscard]] double mean_sparsity(std::span<const Vec3> points);

// Tolerant collision loss of `intruder` against `anchor`:
// lambda_c * sum_k relu(R - |p_k - mean(anchor)|) with R = mean_sparsity(anchor).
// Shallow contact beyond the sparsity radius costs nothing. Asymmetric in
// its arguments by construction.
[[nodiscard]] double collision_loss_pair(std::span<const Vec3> anchor,
                                         std::span<const Vec3> intruder,
                                         double lambda_c);

// Sum of collision_loss_pair over ordered instance pairs (i, j), i != j
// (both orderings when opts.symmetrize). Gradients included.
[[nodiscard]] CollisionReport collision_loss_scene(const Scene& scene, const CollisionOptions& opts);

// Gradient of the collision_loss_scene total w.r.t. each instance's
// translation, rotation tangent and scale. The relu subgradient at exactly 0
// is taken as 0; the anchor's mean and sparsity radius follow its transform
// through the chain rule unless opts.frozen_anchor.
[[nodiscard]] std::vector<TransformGrad> collision_grad(const Scene& scene, const CollisionOptions& opts);

} // namespace cpl
