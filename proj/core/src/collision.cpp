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

#include "cpl/collision.hpp"

#include "cpl/errors.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace cpl {

namespace {

    // Per-instance quantities reused across all pairs it participates in.
    struct InstanceStats {
        std::vector<Vec3> world;   // possibly subsampled world-space points
        std::vector<Vec3> rotated; // s * R * q for the same points, i.e. world - t
        Vec3 mean;                 // world mean c
        Vec3 rotated_mean;         // c - t (what rotation/scale act on)
        double scale;
        double sparsity;           // R = mean |p - c|
        double canonical_sparsity; // R / s: mean |q - q_mean| of the kept points
    };

    [[nodiscard]] std::vector<std::size_t> subsample_indices(std::size_t count,
                                                             std::size_t keep,
                                                             std::uint64_t seed) {
        std::vector<std::size_t> idx(count);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::mt19937_64 rng(seed);
        // partial Fisher-Yates, fully deterministic for a fixed seed
        for (std::size_t i = 0; i < keep; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (count - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(keep);
        return idx;
    }

    [[nodiscard]] InstanceStats instance_stats(const SceneInstance& inst,
                                               std::size_t instance_index,
                                               const CollisionOptions& opts) {
        const Mat3 rot = inst.transform.rotation.toRotationMatrix();
        const double s = inst.transform.scale;
        const Vec3& t = inst.transform.translation;

        const std::size_t k = inst.cloud.points.size();
        std::vector<std::size_t> keep;
        if (opts.max_points > 0 && k > opts.max_points) {
            keep = subsample_indices(k, opts.max_points, opts.seed * 0x9e3779b97f4a7c15ull + instance_index);
        } else {
            keep.resize(k);
            std::iota(keep.begin(), keep.end(), std::size_t{0});
        }

        InstanceStats st;
        st.world.reserve(keep.size());
        st.rotated.reserve(keep.size());
        for (std::size_t i : keep) {
            const Vec3 r = s * (rot * inst.cloud.points[i]);
            st.rotated.push_back(r);
            st.world.push_back(r + t);
        }

        st.mean = Vec3::Zero();
        for (const Vec3& p : st.world) {
            st.mean += p;
        }
        st.mean /= static_cast<double>(st.world.size());
        st.rotated_mean = st.mean - t;

        st.sparsity = 0.0;
        for (const Vec3& p : st.world) {
            st.sparsity += (p - st.mean).norm();
        }
        st.sparsity /= static_cast<double>(st.world.size());
        st.scale = s;
        st.canonical_sparsity = st.sparsity / s;
        return st;
    }

    // Evaluates one ordered pair and accumulates gradients in place.
    [[nodiscard]] double accumulate_pair(const InstanceStats& anchor,
                                         const InstanceStats& intruder,
                                         const CollisionOptions& opts,
                                         TransformGrad& anchor_grad,
                                         TransformGrad& intruder_grad) {
        const double lambda = opts.lambda_c;
        const double radius = anchor.sparsity;

        double loss = 0.0;
        Vec3 dir_sum = Vec3::Zero(); // sum of unit vectors c -> p over active points
        std::size_t active = 0;

        for (std::size_t k = 0; k < intruder.world.size(); ++k) {
            const Vec3 delta = intruder.world[k] - anchor.mean;
            const double dist = delta.norm();
            const double margin = radius - dist;
            if (margin <= 0.0) {
                continue; // relu dead zone; subgradient at exactly 0 is 0
            }
            loss += lambda * margin;
            ++active;

            // u = 0 at dist == 0 (subgradient choice for the norm's kink)
            const Vec3 u = dist > 0.0 ? Vec3(delta / dist) : Vec3::Zero();
            dir_sum += u;

            const Vec3 g_p = -lambda * u; // dL/dp_k for the intruder point
            intruder_grad.translation += g_p;
            intruder_grad.scale += g_p.dot(intruder.rotated[k]) / intruder.scale;
            intruder_grad.rotation += intruder.rotated[k].cross(g_p);
        }

        if (active > 0 && !opts.frozen_anchor) {
            // L depends on the anchor through c (all terms) and R (scale only):
            // dR/ds = R/s, dc/ds = rotated_mean, dc/dt = I, dc/dw = w x rotated_mean.
            const Vec3 g_c = lambda * dir_sum;
            anchor_grad.translation += g_c;
            anchor_grad.scale += lambda * static_cast<double>(active) * anchor.canonical_sparsity +
                                 g_c.dot(anchor.rotated_mean) / anchor.scale;
            anchor_grad.rotation += anchor.rotated_mean.cross(g_c);
        }
        return loss;
    }

    [[nodiscard]] CollisionReport evaluate_scene(const Scene& scene, const CollisionOptions& opts) {
        validate(scene);
        const std::size_t n = scene.instances.size();

        std::vector<InstanceStats> stats;
        stats.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            stats.push_back(instance_stats(scene.instances[i], i, opts));
        }

        CollisionReport report;
        report.gradients.assign(n, TransformGrad{});

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double lij = accumulate_pair(stats[i], stats[j], opts,
                                                   report.gradients[i], report.gradients[j]);
                report.pairs.push_back({i, j, lij});
                report.total += lij;
                if (opts.symmetrize) {
                    const double lji = accumulate_pair(stats[j], stats[i], opts,
                                                       report.gradients[j], report.gradients[i]);
                    report.pairs.push_back({j, i, lji});
                    report.total += lji;
                }
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            const TransformGrad& g = report.gradients[i];
            if (!g.translation.allFinite() || !g.rotation.allFinite() || !std::isfinite(g.scale)) {
                throw NumericError("numeric/collision-gradient",
                                   "non-finite collision gradient for instance '" +
                                       scene.instances[i].id + "'");
            }
        }
        return report;
    }

} // namespace

double mean_sparsity(std::span<const Vec3> points) {
    if (points.empty()) {
        throw ValidationError("validation/empty-point-set", "mean_sparsity needs at least one point");
    }
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : points) {
        mean += p;
    }
    mean /= static_cast<double>(points.size());

    double acc = 0.0;
    for (const Vec3& p : points) {
        acc += (p - mean).norm();
    }
    return acc / static_cast<double>(points.size());
}

double collision_loss_pair(std::span<const Vec3> anchor,
                           std::span<const Vec3> intruder,
                           double lambda_c) {
    if (anchor.empty() || intruder.empty()) {
        throw ValidationError("validation/empty-point-set", "collision pair needs non-empty point sets");
    }
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : anchor) {
        mean += p;
    }
    mean /= static_cast<double>(anchor.size());
    const double radius = mean_sparsity(anchor);

    double loss = 0.0;
    for (const Vec3& p : intruder) {
        const double margin = radius - (p - mean).norm();
        if (margin > 0.0) {
            loss += margin;
        }
    }
    return lambda_c * loss;
}

CollisionReport collision_loss_scene(const Scene& scene, const CollisionOptions& opts) {
    return evaluate_scene(scene, opts);
}

std::vector<TransformGrad> collision_grad(const Scene& scene, const CollisionOptions& opts) {
    return evaluate_scene(scene, opts).gradients;
}

} // namespace cpl
