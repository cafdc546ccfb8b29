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

#include "cpl/guidance.hpp"

#include "cpl/errors.hpp"
#include "cpl/fd_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace cpl {

namespace {

    constexpr double kDepthSpanEps = 0.0; // exact zero span falls back to 0.5

    [[nodiscard]] double uniform01(std::mt19937_64& rng) {
        // 53 mantissa bits; avoids distribution implementation differences
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }

} // namespace

double cosine_similarity(const FeatureVec& a, const FeatureVec& b) {
    if (a.descriptor_id != b.descriptor_id || a.values.size() != b.values.size()) {
        throw ValidationError("validation/incompatible-feature",
                              "cosine similarity requires features of one descriptor family");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw NumericError("numeric/zero-feature", "cosine similarity of a zero feature vector");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

FeatureVec SilhouetteDepthExtractor::extract(const RenderBuffers& buffers) const {
    const int w = buffers.width;
    const int h = buffers.height;
    if (w < kDescriptorPoolGrid || h < kDescriptorPoolGrid) {
        throw ValidationError("validation/descriptor-dims",
                              "descriptor needs at least a 16x16 view");
    }

    // Foreground depth range for the per-view normalization.
    double d_min = kDepthBackground;
    double d_max = -kDepthBackground;
    std::size_t fg_count = 0;
    for (std::size_t i = 0; i < buffers.depth.size(); ++i) {
        if (buffers.silhouette[i] != 0) {
            d_min = std::min(d_min, buffers.depth[i]);
            d_max = std::max(d_max, buffers.depth[i]);
            ++fg_count;
        }
    }
    if (fg_count == 0) {
        throw ValidationError("validation/empty-silhouette",
                              "cannot extract a descriptor from an empty silhouette");
    }
    const double span = d_max - d_min;

    FeatureVec out;
    out.descriptor_id = kSilhouetteDepthDescriptorId;
    out.values.assign(kDescriptorLength, 0.0);

    const int g = kDescriptorPoolGrid;
    for (int by = 0; by < g; ++by) {
        const int y0 = by * h / g;
        const int y1 = (by + 1) * h / g;
        for (int bx = 0; bx < g; ++bx) {
            const int x0 = bx * w / g;
            const int x1 = (bx + 1) * w / g;
            double sil_acc = 0.0;
            double depth_acc = 0.0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    const std::size_t px = buffers.index(x, y);
                    if (buffers.silhouette[px] == 0) {
                        continue;
                    }
                    sil_acc += 1.0;
                    depth_acc += span > kDepthSpanEps ? (buffers.depth[px] - d_min) / span : 0.5;
                }
            }
            const double block_pixels = static_cast<double>((y1 - y0) * (x1 - x0));
            out.values[by * g + bx] = sil_acc / block_pixels;
            out.values[g * g + by * g + bx] = depth_acc / block_pixels;
        }
    }

    // Silhouette centroid and second-order central moments over pixel
    // centers, normalized by the image dimensions.
    double su = 0.0, sv = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (buffers.foreground(x, y)) {
                su += x + 0.5;
                sv += y + 0.5;
            }
        }
    }
    const double inv_n = 1.0 / static_cast<double>(fg_count);
    const double mu = su * inv_n;
    const double mv = sv * inv_n;
    double muu = 0.0, mvv = 0.0, muv = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (buffers.foreground(x, y)) {
                const double du = (x + 0.5) - mu;
                const double dv = (y + 0.5) - mv;
                muu += du * du;
                mvv += dv * dv;
                muv += du * dv;
            }
        }
    }
    const std::size_t m0 = 2 * g * g;
    out.values[m0 + 0] = mu / w;
    out.values[m0 + 1] = mv / h;
    out.values[m0 + 2] = muu * inv_n / (static_cast<double>(w) * w);
    out.values[m0 + 3] = mvv * inv_n / (static_cast<double>(h) * h);
    out.values[m0 + 4] = muv * inv_n / (static_cast<double>(w) * h);

    double norm = 0.0;
    for (double v : out.values) {
        norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        throw NumericError("numeric/zero-feature", "descriptor collapsed to zero");
    }
    for (double& v : out.values) {
        v /= norm;
    }
    return out;
}

FeatureVec extract_default_feature(const RenderBuffers& buffers) {
    return SilhouetteDepthExtractor{}.extract(buffers);
}

MaskImage mask_union(std::span<const MaskImage> masks) {
    if (masks.empty()) {
        throw ValidationError("validation/empty-mask-list", "mask union of no masks");
    }
    MaskImage out = masks.front();
    for (std::size_t i = 1; i < masks.size(); ++i) {
        const MaskImage& m = masks[i];
        if (m.width != out.width || m.height != out.height) {
            throw ValidationError("validation/mask-dims", "mask dimensions disagree");
        }
        for (std::size_t px = 0; px < out.values.size(); ++px) {
            out.values[px] = (out.values[px] != 0 || m.values[px] != 0) ? 1 : 0;
        }
    }
    for (auto& v : out.values) {
        v = v != 0 ? 1 : 0;
    }
    return out;
}

FeatureVec masked_reference_feature(const RenderBuffers& reference,
                                    const MaskImage& union_mask,
                                    const FeatureExtractor& extractor) {
    if (union_mask.width != reference.width || union_mask.height != reference.height) {
        throw ValidationError("validation/mask-dims", "union mask does not match the reference view");
    }
    if (union_mask.set_count() == 0) {
        throw ValidationError("validation/empty-union-mask", "union mask is empty");
    }
    RenderBuffers masked = reference;
    for (std::size_t px = 0; px < masked.silhouette.size(); ++px) {
        if (union_mask.values[px] == 0) {
            masked.silhouette[px] = 0;
            masked.depth[px] = kDepthBackground;
            masked.normal[px] = Vec3::Zero();
        }
    }
    return extractor.extract(masked);
}

double reference_loss(const FeatureVec& f_ref, const FeatureVec& f_render, double lambda_f) {
    if (f_ref.descriptor_id != f_render.descriptor_id ||
        f_ref.values.size() != f_render.values.size()) {
        throw ValidationError("validation/incompatible-feature",
                              "reference loss requires features of one descriptor family");
    }
    // One norm per descriptor section for the built-in descriptor; a single
    // global norm otherwise.
    std::vector<std::size_t> bounds;
    if (f_ref.descriptor_id == kSilhouetteDepthDescriptorId &&
        f_ref.values.size() == static_cast<std::size_t>(kDescriptorLength)) {
        const std::size_t block = kDescriptorPoolGrid * kDescriptorPoolGrid;
        bounds = {0, block, 2 * block, f_ref.values.size()};
    } else {
        bounds = {0, f_ref.values.size()};
    }

    double loss = 0.0;
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        double acc = 0.0;
        for (std::size_t i = bounds[b]; i < bounds[b + 1]; ++i) {
            const double d = f_ref.values[i] - f_render.values[i];
            acc += d * d;
        }
        loss += std::sqrt(acc);
    }
    return lambda_f * loss;
}

void validate(const TimestepSchedule& schedule) {
    if (schedule.phases.empty()) {
        throw ValidationError("validation/empty-schedule", "schedule needs at least one phase");
    }
    for (std::size_t i = 0; i < schedule.phases.size(); ++i) {
        const SchedulePhase& p = schedule.phases[i];
        if (p.begin >= p.end) {
            throw ValidationError("validation/schedule-phase", "phase iteration interval is empty");
        }
        if (!(p.t_min >= 0.0 && p.t_min < p.t_max && p.t_max <= 1.0)) {
            throw ValidationError("validation/schedule-range",
                                  "phase noise range must satisfy 0 <= t_min < t_max <= 1");
        }
        if (i > 0 && schedule.phases[i - 1].end != p.begin) {
            throw ValidationError("validation/schedule-gap", "phases must be contiguous");
        }
    }
}

TimestepSchedule default_timestep_schedule(int total_iterations) {
    TimestepSchedule out;
    const int boundary = std::min(800, total_iterations);
    out.phases.push_back({0, boundary, 0.10, 0.50});
    if (total_iterations > boundary) {
        out.phases.push_back({boundary, total_iterations, 0.02, 0.75});
    }
    return out;
}

double sample_timestep(const TimestepSchedule& schedule, int iteration, std::mt19937_64& rng) {
    validate(schedule);
    for (const SchedulePhase& p : schedule.phases) {
        if (iteration >= p.begin && iteration < p.end) {
            const double t = p.t_min + (p.t_max - p.t_min) * uniform01(rng);
            if (!(t >= p.t_min && t <= p.t_max)) {
                throw NumericError("numeric/timestep-out-of-range", "sampled timestep left its phase");
            }
            return t;
        }
    }
    throw ValidationError("validation/schedule-exhausted",
                          "iteration " + std::to_string(iteration) + " is outside every phase");
}

double timestep_weight(const TimestepSchedule& schedule, double t) {
    (void)t;
    if (schedule.weighting == "constant") {
        return 1.0;
    }
    throw ValidationError("validation/unknown-weighting",
                          "unknown timestep weighting '" + schedule.weighting + "'");
}

namespace {

    template <typename Field, typename PairCost>
    [[nodiscard]] double masked_pair_mean(const Field& field, const MaskImage& mask,
                                          PairCost cost) {
        const int w = mask.width;
        const int h = mask.height;
        if (field.size() != mask.values.size()) {
            throw ValidationError("validation/field-dims", "field does not match the mask");
        }
        double acc = 0.0;
        std::size_t pairs = 0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!mask.at(x, y)) {
                    continue;
                }
                if (x + 1 < w && mask.at(x + 1, y)) {
                    acc += cost(field[mask.index(x, y)], field[mask.index(x + 1, y)]);
                    ++pairs;
                }
                if (y + 1 < h && mask.at(x, y + 1)) {
                    acc += cost(field[mask.index(x, y)], field[mask.index(x, y + 1)]);
                    ++pairs;
                }
            }
        }
        return pairs == 0 ? 0.0 : acc / static_cast<double>(pairs);
    }

} // namespace

double tv_loss(std::span<const double> field, const MaskImage& mask, TvVariant variant) {
    return masked_pair_mean(field, mask, [variant](double a, double b) {
        const double d = a - b;
        return variant == TvVariant::kSquared ? d * d : std::abs(d);
    });
}

double tv_loss(std::span<const Vec3> field, const MaskImage& mask, TvVariant variant) {
    return masked_pair_mean(field, mask, [variant](const Vec3& a, const Vec3& b) {
        const Vec3 d = a - b;
        return variant == TvVariant::kSquared ? d.squaredNorm() : d.norm();
    });
}

double normal_smooth_loss(std::span<const Vec3> normals, const MaskImage& mask) {
    return masked_pair_mean(normals, mask,
                            [](const Vec3& a, const Vec3& b) { return 1.0 - a.dot(b); });
}

MaskImage silhouette_mask(const RenderBuffers& buffers) {
    return MaskImage{buffers.width, buffers.height, buffers.silhouette};
}

GuidanceEval StubZeroGuidance::evaluate(const Scene& scene, const RenderBuffers&,
                                        const std::string&, int) {
    GuidanceEval out;
    out.loss = 0.0;
    out.gradients.assign(scene.instances.size(), TransformGrad{});
    return out;
}

ReferenceFeatureGuidance::ReferenceFeatureGuidance(FeatureVec reference_feature,
                                                   CameraModel camera,
                                                   std::shared_ptr<const FeatureExtractor> extractor,
                                                   double lambda_f, double fd_step)
    : reference_(std::move(reference_feature)),
      camera_(camera),
      extractor_(std::move(extractor)),
      lambda_f_(lambda_f),
      fd_step_(fd_step) {}

GuidanceEval ReferenceFeatureGuidance::evaluate(const Scene& scene,
                                                const RenderBuffers& rendered,
                                                const std::string&, int) {
    const auto loss_of = [this](const Scene& s) {
        const RenderBuffers view = render(compose_scene(s), camera_);
        return reference_loss(reference_, extractor_->extract(view), lambda_f_);
    };

    GuidanceEval out;
    out.loss = reference_loss(reference_, extractor_->extract(rendered), lambda_f_);
    out.gradients.reserve(scene.instances.size());
    for (std::size_t i = 0; i < scene.instances.size(); ++i) {
        out.gradients.push_back(fd_transform_gradient(scene, i, loss_of, fd_step_));
    }
    return out;
}

} // namespace cpl
