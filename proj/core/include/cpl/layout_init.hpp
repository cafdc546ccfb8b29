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

#include "cpl/guidance.hpp"
#include "cpl/images.hpp"
#include "cpl/rasterizer.hpp"
#include "cpl/scene_model.hpp"

#include <utility>
#include <vector>

namespace cpl {

// Materialized camera-pose grid for render-and-compare rotation search.
// The full Cartesian product of azimuths {0, step, ...} and elevations
// {lo, lo+step, ..., hi}; the grid always contains azimuth 0 / elevation 0.
struct PoseGrid {
    double step_deg{10.0};
    double elevation_lo_deg{-30.0};
    double elevation_hi_deg{60.0};
    std::vector<Pose> poses; // elevation-major, azimuth ascending within
};

// step must divide 360 and the elevation range must place 0 on the grid.
// camera_radius is attached to every pose.
[[nodiscard]] PoseGrid build_pose_grid(double step_deg, double elevation_lo_deg,
                                       double elevation_hi_deg, double camera_radius);

// Depth map plus per-instance foreground masks on the layout canvas.
// Depth values are relative (not metric); smaller = nearer the camera.
struct DepthInput {
    GrayImage depth;
    std::vector<MaskImage> masks; // one per layout entry, same dims as depth
};

void validate(const DepthInput& input);

// Scale from the width ratio of the original box to the post-processed
// (recentered and padded) instance image.
[[nodiscard]] double init_scale(const BBox2D& orig_box, double postprocessed_width);

// Width of the post-processing canvas an object occupies after the
// recenter-and-pad step: floor(fill_ratio * canvas_side).
[[nodiscard]] double postprocessed_width(int canvas_side, double fill_ratio = 0.9);

// Canvas pixel coordinates to scene coordinates: the canvas spans [-1, 1]
// on both axes, image y points down, scene y points up.
[[nodiscard]] std::pair<double, double> canvas_to_scene_xy(double cx, double cy, int canvas_width,
                                                           int canvas_height);

// Box center mapped to scene coordinates.
[[nodiscard]] std::pair<double, double> init_translation_xy(const BBox2D& box, int canvas_width,
                                                            int canvas_height);

// Masked mean depths of all instances, affinely remapped so that the scene
// spans [-1, 1] with nearer instances at larger z; one instance (or equal
// means) maps to 0. Returns z for `instance`.
[[nodiscard]] double init_depth_z(const DepthInput& input, std::size_t instance);

// Masked mean of the depth map (no normalization).
[[nodiscard]] double masked_mean_depth(const GrayImage& depth, const MaskImage& mask);

struct RotationEstimate {
    Pose pose;
    double similarity;
};

// Renders the cloud at every grid pose, extracts features, and returns the
// pose maximizing cosine similarity with the reference feature (ties go to
// the lowest pose index). pose_to_object_rotation converts the winner into
// the instance's initial quaternion. Extractor failures are rethrown with
// the offending pose attached.
[[nodiscard]] RotationEstimate estimate_rotation(const GaussianCloud& cloud,
                                                 const FeatureVec& reference_feature,
                                                 const PoseGrid& grid,
                                                 const FeatureExtractor& extractor,
                                                 const CameraModel& camera_template);

// Reference view for one instance, built from its canvas mask and the depth
// map: the masked region is recentered into a square view of `side` pixels,
// occupying `fill_ratio` of it (the same convention postprocessed_width
// assumes). Foreground normals are set to the view direction; the default
// descriptor ignores them.
[[nodiscard]] RenderBuffers crop_and_recenter(const MaskImage& mask, const GrayImage& depth,
                                              int side, double fill_ratio = 0.9);

} // namespace cpl
