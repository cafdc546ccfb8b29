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

#include "cpl/collision.hpp"
#include "cpl/layout_init.hpp"
#include "cpl/optimizer.hpp"
#include "cpl/scene_model.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cpl {

// Bounding-box validation mode. Strict enforces the declared
// [x1, y1, x2, y2] corner format within the canvas. Lenient reinterprets
// violating rows as [x, y, w, h], clamps to the canvas, and expands
// zero-extent dimensions to one pixel.
enum class BBoxMode { kStrict, kLenient };

struct BBoxRecovery {
    std::size_t entry_index{0};
    std::array<double, 4> raw{};
    std::string mode; // "xywh" or "xywh-minsize"
};

// Rows the lenient loader had to reinterpret.
struct LayoutLoadReport {
    std::vector<BBoxRecovery> recovered;
};

[[nodiscard]] bool bbox_row_strictly_valid(const std::array<double, 4>& raw, int canvas_width,
                                           int canvas_height);

// Strict mode throws on violations; lenient mode recovers (recording how in
// *mode_used: "corners", "xywh" or "xywh-minsize").
[[nodiscard]] BBox2D recover_bbox(const std::array<double, 4>& raw, BBoxMode mode,
                                  int canvas_width, int canvas_height,
                                  std::string* mode_used = nullptr);

// --- scene file -------------------------------------------------------------

struct SceneFileEntry {
    std::array<double, 4> bbox_raw{};
    std::string label;
    std::string cloud_path; // empty when the entry has no geometry yet
    std::optional<InstanceTransform> transform;
};

// JSON scene document: canvas, prompt, entries (bbox/label/cloud/transform),
// optional depth map and per-entry masks, optional config overrides.
// Relative paths resolve against the scene file's directory.
struct SceneFile {
    int canvas_width{512};
    int canvas_height{512};
    std::string prompt;
    std::vector<SceneFileEntry> entries;
    std::string depth_map_path;
    std::vector<std::string> mask_paths;
    std::string config_json; // raw overrides object, empty when absent
};

[[nodiscard]] SceneFile parse_scene_file(const std::string& json_text);
[[nodiscard]] SceneFile load_scene_file(const std::filesystem::path& path);

// Canonical serialization: alphabetical keys, shortest-round-trip numbers,
// so save -> load -> save is byte-identical.
[[nodiscard]] std::string scene_file_to_json(const SceneFile& file);
void save_scene_file(const SceneFile& file, const std::filesystem::path& path);

[[nodiscard]] LayoutSpec layout_from_scene_file(const SceneFile& file, BBoxMode mode,
                                                LayoutLoadReport* report = nullptr);

[[nodiscard]] LayoutSpec load_layout_spec(const std::filesystem::path& path, BBoxMode mode,
                                          LayoutLoadReport* report = nullptr);

// Scene file plus everything it references, ready for the pipeline; clouds
// are normalized into the canonical object frame on load.
struct SceneBundle {
    SceneFile file;
    LayoutSpec layout;
    Scene scene;
    std::optional<DepthInput> depth;
    std::filesystem::path base_dir;
};

[[nodiscard]] SceneBundle load_scene_bundle(const std::filesystem::path& path, BBoxMode mode,
                                            LayoutLoadReport* report = nullptr);

// Same, for an already-parsed file (relative paths resolve against base_dir).
[[nodiscard]] SceneBundle bundle_from_file(const SceneFile& file,
                                           const std::filesystem::path& base_dir, BBoxMode mode,
                                           LayoutLoadReport* report = nullptr);

// --- engine configuration ----------------------------------------------------

struct EngineConfig {
    BBoxMode bbox_mode{BBoxMode::kStrict};

    double pose_grid_step_deg{10.0};
    double pose_grid_elevation_lo{-30.0};
    double pose_grid_elevation_hi{60.0};
    int pose_search_resolution{128};

    int loss_render_resolution{256};
    double camera_fov_deg{45.0};
    double camera_fill{0.8};   // fraction of the image a unit object spans
    double recenter_fill{0.9}; // recenter-and-pad occupancy ratio

    LayoutOptConfig layout{};
    InstanceRefineConfig refine_short{InstanceRefineConfig::short_profile()};
    InstanceRefineConfig refine_extended{InstanceRefineConfig::extended_profile()};
};

// Camera with derived orbit radius (unit-extent object at camera_fill).
[[nodiscard]] CameraModel make_camera(const EngineConfig& cfg, int resolution);

// Applies a JSON object of overrides; unknown keys are rejected. The layout
// reference camera is re-derived afterwards.
void apply_config_overrides(EngineConfig& cfg, const std::string& json_text);

[[nodiscard]] EngineConfig load_engine_config(const std::filesystem::path& path);

// --- pipeline drivers ---------------------------------------------------------

// Lifts the 2D layout into initial transforms for every instance: scale from
// box widths, x/y from box centers, z from masked depth means, rotation from
// the feature-similarity pose grid. Depth- and mask-dependent parts fall
// back to z = 0 / identity rotation when those inputs are absent. Updated
// transforms are written into both bundle.scene and bundle.file.
void initialize_scene_transforms(SceneBundle& bundle, const EngineConfig& cfg);

// Runs layout refinement on the bundle (building the masked reference view
// when depth and masks are available) and writes the refined transforms
// back. Returns the result with its trace.
[[nodiscard]] LayoutRefineResult refine_scene_layout(SceneBundle& bundle, const EngineConfig& cfg);

// --- exports -------------------------------------------------------------------

[[nodiscard]] std::string trace_to_json(const OptTrace& trace);
[[nodiscard]] std::string collision_report_to_json(const CollisionReport& report,
                                                   const Scene& scene);
[[nodiscard]] std::string plan_to_csv(const std::vector<PlanEntry>& plan);
[[nodiscard]] std::string plan_to_json(const std::vector<PlanEntry>& plan);

} // namespace cpl
