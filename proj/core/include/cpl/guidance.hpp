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

#include "cpl/images.hpp"
#include "cpl/rasterizer.hpp"

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cpl {

// Fixed-length descriptor of a rendered or reference view. descriptor_id
// identifies the extractor family; vectors from different families never
// compare.
struct FeatureVec {
    std::vector<double> values;
    std::string descriptor_id;
};

[[nodiscard]] double cosine_similarity(const FeatureVec& a, const FeatureVec& b);

// Pure view-buffers -> FeatureVec mapping. Implementations must be
// deterministic and thread-safe.
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    [[nodiscard]] virtual std::string descriptor_id() const = 0;
    [[nodiscard]] virtual FeatureVec extract(const RenderBuffers& buffers) const = 0;
};

inline constexpr const char* kSilhouetteDepthDescriptorId = "silhouette-depth/v1";
inline constexpr int kDescriptorPoolGrid = 16;
inline constexpr int kDescriptorMomentCount = 5;
// 16x16 pooled silhouette + 16x16 pooled depth + 5 moments
inline constexpr int kDescriptorLength =
    2 * kDescriptorPoolGrid * kDescriptorPoolGrid + kDescriptorMomentCount;

// Built-in geometric descriptor: concatenation of
//   (a) 16x16 average-pooled silhouette,
//   (b) 16x16 average-pooled foreground depth, normalized per view to [0, 1]
//       (so the descriptor ignores global depth scale and offset),
//   (c) silhouette centroid and second-order central moments (5 values,
//       normalized by the image dimensions),
// L2-normalized to unit length (517 values). Throws on an empty silhouette.
class SilhouetteDepthExtractor final : public FeatureExtractor {
public:
    [[nodiscard]] std::string descriptor_id() const override { return kSilhouetteDepthDescriptorId; }
    [[nodiscard]] FeatureVec extract(const RenderBuffers& buffers) const override;
};

// Convenience wrapper over the built-in extractor.
[[nodiscard]] FeatureVec extract_default_feature(const RenderBuffers& buffers);

// Pixelwise logical-or of instance masks (all dims must agree).
[[nodiscard]] MaskImage mask_union(std::span<const MaskImage> masks);

// Masks the reference view to the union of instance foregrounds, then runs
// the extractor. Masked-out pixels become background. Throws on an empty
// union mask.
[[nodiscard]] FeatureVec masked_reference_feature(const RenderBuffers& reference,
                                                  const MaskImage& union_mask,
                                                  const FeatureExtractor& extractor);

// Feature-level reference loss: lambda_f times the Euclidean distance of the
// two descriptors, summed per feature block (the built-in descriptor's three
// sections; a single global block for unknown descriptor ids). Throws on a
// descriptor-id or length mismatch.
[[nodiscard]] double reference_loss(const FeatureVec& f_ref, const FeatureVec& f_render,
                                    double lambda_f);

// --- timestep schedule -------------------------------------------------

// Phase of the sampling schedule: iterations [begin, end) draw noise levels
// uniformly from [t_min, t_max].
struct SchedulePhase {
    int begin{0};
    int end{0};
    double t_min{0.0};
    double t_max{1.0};
};

struct TimestepSchedule {
    std::vector<SchedulePhase> phases;
    std::string weighting{"constant"}; // w(t) tag; constant 1 at desk scale
};

// Contiguous non-overlapping phases, 0 <= t_min < t_max <= 1.
void validate(const TimestepSchedule& schedule);

// Two-phase default: [0.10, 0.50] until the boundary iteration 800, then
// [0.02, 0.75] until `total_iterations`.
[[nodiscard]] TimestepSchedule default_timestep_schedule(int total_iterations);

// Uniform draw from the phase covering `iteration`. Deterministic for a
// fixed rng state and call sequence; every draw is checked against the
// active range. Throws when no phase covers the iteration.
[[nodiscard]] double sample_timestep(const TimestepSchedule& schedule, int iteration,
                                     std::mt19937_64& rng);

[[nodiscard]] double timestep_weight(const TimestepSchedule& schedule, double t);

// --- regularizers -------------------------------------------------------

enum class TvVariant {
    kSquared, // squared differences (differentiable everywhere)
    kAbsolute // classic absolute-value variant
};

// Total variation over the masked field: mean over 4-neighbor pixel pairs
// with both endpoints masked of the (squared) difference; vector fields use
// the (squared) Euclidean difference. A mask with no adjacent pair gives 0.
[[nodiscard]] double tv_loss(std::span<const double> field, const MaskImage& mask,
                             TvVariant variant = TvVariant::kSquared);
[[nodiscard]] double tv_loss(std::span<const Vec3> field, const MaskImage& mask,
                             TvVariant variant = TvVariant::kSquared);

// Mean over masked adjacent pairs of (1 - dot(n_i, n_j)); expects unit
// normals on the mask.
[[nodiscard]] double normal_smooth_loss(std::span<const Vec3> normals, const MaskImage& mask);

// Mask covering the buffers' foreground.
[[nodiscard]] MaskImage silhouette_mask(const RenderBuffers& buffers);

// --- guidance slot -------------------------------------------------------

struct GuidanceEval {
    double loss{0.0};
    std::vector<TransformGrad> gradients; // one per scene instance
};

// Loss provider evaluated on rendered views each layout-refinement
// iteration. This is the plug point for external diffusion guidance; the
// library ships a zero stub and a reference-feature implementation.
class GuidanceTerm {
public:
    virtual ~GuidanceTerm() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual GuidanceEval evaluate(const Scene& scene,
                                                const RenderBuffers& reference_view_render,
                                                const std::string& prompt,
                                                int iteration) = 0;
};

// Default slot filler: exactly zero loss and zero gradients.
class StubZeroGuidance final : public GuidanceTerm {
public:
    [[nodiscard]] std::string name() const override { return "stub-zero"; }
    [[nodiscard]] GuidanceEval evaluate(const Scene& scene, const RenderBuffers&,
                                        const std::string&, int) override;
};

// Routes the feature-level reference loss through the guidance slot
// (gradients via central finite differences). Pair with lambda_f = 0 in the
// layout config to avoid counting the feature loss twice.
class ReferenceFeatureGuidance final : public GuidanceTerm {
public:
    ReferenceFeatureGuidance(FeatureVec reference_feature, CameraModel camera,
                             std::shared_ptr<const FeatureExtractor> extractor,
                             double lambda_f, double fd_step = 1e-3);

    [[nodiscard]] std::string name() const override { return "reference-feature"; }
    [[nodiscard]] GuidanceEval evaluate(const Scene& scene, const RenderBuffers& rendered,
                                        const std::string& prompt, int iteration) override;

private:
    FeatureVec reference_;
    CameraModel camera_;
    std::shared_ptr<const FeatureExtractor> extractor_;
    double lambda_f_;
    double fd_step_;
};

} // namespace cpl
