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

#include "cpl/optimizer.hpp"

#include "cpl/errors.hpp"
#include "cpl/fd_gradient.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>

namespace cpl {

namespace {

    constexpr double kQuatNormTol = 1e-9;

    [[nodiscard]] std::vector<InstanceTransform> snapshot(const Scene& scene) {
        std::vector<InstanceTransform> out;
        out.reserve(scene.instances.size());
        for (const SceneInstance& inst : scene.instances) {
            out.push_back(inst.transform);
        }
        return out;
    }

    // Per-instance first/second moment state for the adaptive variant,
    // flattened as [rx, ry, rz, tx, ty, tz].
    struct AdamState {
        std::vector<std::array<double, 6>> m;
        std::vector<std::array<double, 6>> v;
    };

    void append_csv_double(std::string& out, double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out += buf;
    }

} // namespace

std::string trace_to_csv(const OptTrace& trace) {
    std::string out = "iteration,total,ssds,feat,col\n";
    for (const TraceRow& row : trace.rows) {
        out += std::to_string(row.iteration);
        out += ',';
        append_csv_double(out, row.total);
        out += ',';
        append_csv_double(out, row.ssds);
        out += ',';
        append_csv_double(out, row.feat);
        out += ',';
        append_csv_double(out, row.col);
        out += '\n';
    }
    return out;
}

TransformGrad feature_loss_gradient(const Scene& scene, const ReferenceView& reference,
                                    std::size_t instance, double h, double lambda_f,
                                    const CameraModel& camera, const FeatureExtractor& extractor) {
    const auto loss_of = [&](const Scene& s) {
        const RenderBuffers view = render(compose_scene(s), camera);
        return reference_loss(reference.feature, extractor.extract(view), lambda_f);
    };
    return fd_transform_gradient(scene, instance, loss_of, h);
}

LayoutRefineResult refine_layout(const Scene& scene_in,
                                 const std::optional<ReferenceView>& reference,
                                 const LayoutOptConfig& cfg, const std::string& prompt,
                                 GuidanceTerm* external_guidance) {
    validate(scene_in);
    if (cfg.iterations < 1) {
        throw ValidationError("validation/iterations", "iteration count must be at least 1");
    }

    CollisionOptions copts = cfg.collision;
    copts.lambda_c = cfg.lambda_c;
    copts.seed = cfg.seed;

    const SilhouetteDepthExtractor extractor;

    // Resolve the guidance slot. reference-feature disables the built-in
    // feature path so the term is counted once.
    std::unique_ptr<GuidanceTerm> owned_guidance;
    GuidanceTerm* guidance = external_guidance;
    if (guidance == nullptr) {
        if (cfg.guidance == "stub-zero") {
            owned_guidance = std::make_unique<StubZeroGuidance>();
        } else if (cfg.guidance == "reference-feature") {
            if (!reference.has_value()) {
                throw ValidationError("validation/missing-reference",
                                      "reference-feature guidance needs a reference view");
            }
            owned_guidance = std::make_unique<ReferenceFeatureGuidance>(
                reference->feature, cfg.reference_camera,
                std::make_shared<SilhouetteDepthExtractor>(), cfg.lambda_f, cfg.fd_step);
        } else {
            throw ValidationError("validation/unknown-guidance",
                                  "unknown guidance selection '" + cfg.guidance + "'");
        }
        guidance = owned_guidance.get();
    }
    const bool feature_via_guidance = guidance->name() == "reference-feature";
    const double builtin_lambda_f = feature_via_guidance ? 0.0 : cfg.lambda_f;
    if (builtin_lambda_f > 0.0 && !reference.has_value()) {
        throw ValidationError("validation/missing-reference",
                              "lambda_f > 0 requires a reference view");
    }
    const bool needs_render = builtin_lambda_f > 0.0 || guidance->name() != "stub-zero";

    LayoutRefineResult result;
    result.scene = scene_in;
    Scene& scene = result.scene;
    const std::size_t n = scene.instances.size();

    AdamState adam;
    if (cfg.use_adam) {
        adam.m.assign(n, {});
        adam.v.assign(n, {});
    }

    for (int it = 0; it < cfg.iterations; ++it) {
        const CollisionReport col = collision_loss_scene(scene, copts);

        RenderBuffers view;
        if (needs_render) {
            view = render(compose_scene(scene), cfg.reference_camera);
        }

        double feat_loss = 0.0;
        std::vector<TransformGrad> feat_grads(n);
        if (builtin_lambda_f > 0.0) {
            feat_loss = reference_loss(reference->feature, extractor.extract(view),
                                       builtin_lambda_f);
            for (std::size_t i = 0; i < n; ++i) {
                feat_grads[i] = feature_loss_gradient(scene, *reference, i, cfg.fd_step,
                                                      builtin_lambda_f, cfg.reference_camera,
                                                      extractor);
            }
        }

        const GuidanceEval guid = guidance->evaluate(scene, view, prompt, it);
        if (guid.gradients.size() != n) {
            throw ValidationError("validation/guidance-gradients",
                                  "guidance term returned a wrong gradient count");
        }

        const double total = col.total + feat_loss + guid.loss;

        TraceRow row;
        row.iteration = it;
        row.total = total;
        row.ssds = guid.loss;
        row.feat = feat_loss;
        row.col = col.total;
        row.transforms = snapshot(scene);
        result.trace.rows.push_back(std::move(row));

        if (!std::isfinite(total)) {
            result.aborted = true;
            result.abort_message = "non-finite layout loss at iteration " + std::to_string(it);
            result.trace.final_transforms = snapshot(scene);
            return result;
        }

        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 g_rot = col.gradients[i].rotation + feat_grads[i].rotation +
                               guid.gradients[i].rotation;
            const Vec3 g_trans = col.gradients[i].translation + feat_grads[i].translation +
                                 guid.gradients[i].translation;

            Vec3 rot_step;
            Vec3 trans_step;
            if (cfg.use_adam) {
                const double g[6] = {g_rot.x(),   g_rot.y(),   g_rot.z(),
                                     g_trans.x(), g_trans.y(), g_trans.z()};
                const double lr[6] = {cfg.lr_quaternion,    cfg.lr_quaternion,
                                      cfg.lr_quaternion,    cfg.lr_translation_x,
                                      cfg.lr_translation_y, cfg.lr_translation_z};
                double step[6];
                const double t = it + 1;
                for (int c = 0; c < 6; ++c) {
                    auto& m = adam.m[i][c];
                    auto& v = adam.v[i][c];
                    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g[c];
                    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g[c] * g[c];
                    const double m_hat = m / (1.0 - std::pow(cfg.adam_beta1, t));
                    const double v_hat = v / (1.0 - std::pow(cfg.adam_beta2, t));
                    step[c] = -lr[c] * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
                }
                rot_step = Vec3(step[0], step[1], step[2]);
                trans_step = Vec3(step[3], step[4], step[5]);
            } else {
                rot_step = -cfg.lr_quaternion * g_rot;
                trans_step = Vec3(-cfg.lr_translation_x * g_trans.x(),
                                  -cfg.lr_translation_y * g_trans.y(),
                                  -cfg.lr_translation_z * g_trans.z());
            }

            InstanceTransform& xf = scene.instances[i].transform;
            xf.translation += trans_step;
            if (!rot_step.isZero(0.0)) { // zero-loss runs stay bit-identical
                xf.rotation = (quat_exp(rot_step) * xf.rotation).normalized();
            }
            if (std::abs(xf.rotation.norm() - 1.0) > kQuatNormTol) {
                throw NumericError("numeric/quaternion-norm",
                                   "quaternion drifted off the unit sphere");
            }
        }
    }

    result.trace.final_transforms = snapshot(scene);
    return result;
}

double interpolate_lr(const LrTriple& triple, int iteration) {
    if (triple.end_iter <= triple.start_iter) {
        return triple.initial;
    }
    if (!(triple.initial > 0.0) || !(triple.final_value > 0.0)) {
        throw ValidationError("validation/lr-triple",
                              "exponential interpolation needs positive endpoints");
    }
    const double tau = std::clamp(
        static_cast<double>(iteration - triple.start_iter) /
            static_cast<double>(triple.end_iter - triple.start_iter),
        0.0, 1.0);
    return triple.initial * std::pow(triple.final_value / triple.initial, tau);
}

InstanceRefineConfig InstanceRefineConfig::short_profile() {
    return InstanceRefineConfig{}; // defaults are the short profile
}

InstanceRefineConfig InstanceRefineConfig::extended_profile() {
    InstanceRefineConfig cfg;
    cfg.total_iterations = 2000;
    cfg.schedule = default_timestep_schedule(2000);
    cfg.densify_interval = 200;
    cfg.densify_start = 400;
    cfg.densify_until = 1600;
    cfg.resolutions = {512};
    cfg.resolution_milestones = {};
    cfg.position_lr = {0, 0.0005, 0.00002, 1000};
    cfg.feature_lr = {0, 0.01, 0.005, 2000};
    cfg.opacity_lr = 0.05;
    cfg.rotation_lr = 0.005;
    return cfg;
}

void validate(const InstanceRefineConfig& cfg) {
    if (cfg.total_iterations < 1) {
        throw ValidationError("validation/iterations", "refinement needs at least one iteration");
    }
    validate(cfg.schedule);
    if (cfg.schedule.phases.front().begin != 0 ||
        cfg.schedule.phases.back().end < cfg.total_iterations) {
        throw ValidationError("validation/schedule-coverage",
                              "schedule must cover [0, total_iterations)");
    }
    if (cfg.densify_interval < 1 || cfg.densify_start < 0 ||
        cfg.densify_until > cfg.total_iterations || cfg.densify_start > cfg.densify_until) {
        throw ValidationError("validation/densify-markers", "densify markers outside the run");
    }
    if (cfg.resolutions.size() != cfg.resolution_milestones.size() + 1) {
        throw ValidationError("validation/resolution-tiers",
                              "need one more resolution than milestones");
    }
}

double assemble_instance_loss(const RenderBuffers& buffers, const InstanceRefineConfig& cfg,
                              double guidance_value) {
    const MaskImage mask = silhouette_mask(buffers);
    const double smooth = normal_smooth_loss(buffers.normal, mask);
    const double tv_d = tv_loss(std::span<const double>(buffers.depth), mask);
    const double tv_n = tv_loss(std::span<const Vec3>(buffers.normal), mask);
    return guidance_value + cfg.lambda_smooth * smooth + cfg.lambda_tv * (tv_d + tv_n);
}

std::vector<PlanEntry> refinement_plan(const InstanceRefineConfig& cfg) {
    validate(cfg);
    std::vector<PlanEntry> plan;
    plan.reserve(static_cast<std::size_t>(cfg.total_iterations));
    for (int it = 0; it < cfg.total_iterations; ++it) {
        PlanEntry entry;
        entry.iteration = it;
        for (const SchedulePhase& p : cfg.schedule.phases) {
            if (it >= p.begin && it < p.end) {
                entry.t_min = p.t_min;
                entry.t_max = p.t_max;
                break;
            }
        }
        entry.densify = it >= cfg.densify_start && it < cfg.densify_until &&
                        it % cfg.densify_interval == 0;
        std::size_t tier = 0;
        for (int milestone : cfg.resolution_milestones) {
            if (it >= milestone) {
                ++tier;
            }
        }
        entry.resolution = cfg.resolutions[tier];
        entry.position_lr = interpolate_lr(cfg.position_lr, it);
        entry.feature_lr = interpolate_lr(cfg.feature_lr, it);
        plan.push_back(entry);
    }
    return plan;
}

} // namespace cpl
