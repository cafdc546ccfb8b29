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

#include "cpl/scene_io.hpp"

#include "cpl/errors.hpp"
#include "cpl/file_util.hpp"
#include "cpl/image_io.hpp"
#include "cpl/ply_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cpl {

namespace {

    using nlohmann::json;

    [[nodiscard]] json parse_json(const std::string& text, const std::string& origin) {
        try {
            return json::parse(text);
        } catch (const json::exception& e) {
            throw ValidationError("validation/json-parse", origin + ": " + e.what());
        }
    }

    [[nodiscard]] std::array<double, 4> number_quad(const json& j, const std::string& what) {
        if (!j.is_array() || j.size() != 4) {
            throw ValidationError("validation/scene-schema", what + " must be an array of 4 numbers");
        }
        std::array<double, 4> out{};
        for (std::size_t i = 0; i < 4; ++i) {
            if (!j[i].is_number()) {
                throw ValidationError("validation/scene-schema", what + " must contain numbers");
            }
            out[i] = j[i].get<double>();
        }
        return out;
    }

    [[nodiscard]] Vec3 vec3_from_json(const json& j, const std::string& what) {
        if (!j.is_array() || j.size() != 3) {
            throw ValidationError("validation/scene-schema", what + " must be an array of 3 numbers");
        }
        return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
    }

    [[nodiscard]] InstanceTransform transform_from_json(const json& j) {
        InstanceTransform xf;
        if (j.contains("scale")) {
            xf.scale = j.at("scale").get<double>();
        }
        if (j.contains("rotation")) {
            const json& r = j.at("rotation");
            if (!r.is_array() || r.size() != 4) {
                throw ValidationError("validation/scene-schema",
                                      "transform.rotation must be [w, x, y, z]");
            }
            xf.rotation = Quat(r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                               r[3].get<double>());
            xf.rotation.normalize();
        }
        if (j.contains("translation")) {
            xf.translation = vec3_from_json(j.at("translation"), "transform.translation");
        }
        return xf;
    }

    [[nodiscard]] json transform_to_json(const InstanceTransform& xf) {
        json j;
        j["scale"] = xf.scale;
        j["rotation"] = {xf.rotation.w(), xf.rotation.x(), xf.rotation.y(), xf.rotation.z()};
        j["translation"] = {xf.translation.x(), xf.translation.y(), xf.translation.z()};
        return j;
    }

    [[nodiscard]] std::string format_row(const std::array<double, 4>& raw) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "[%g, %g, %g, %g]", raw[0], raw[1], raw[2], raw[3]);
        return buf;
    }

} // namespace

bool bbox_row_strictly_valid(const std::array<double, 4>& raw, int canvas_width,
                             int canvas_height) {
    return raw[0] < raw[2] && raw[1] < raw[3] && raw[0] >= 0.0 && raw[1] >= 0.0 &&
           raw[2] <= canvas_width && raw[3] <= canvas_height;
}

BBox2D recover_bbox(const std::array<double, 4>& raw, BBoxMode mode, int canvas_width,
                    int canvas_height, std::string* mode_used) {
    if (bbox_row_strictly_valid(raw, canvas_width, canvas_height)) {
        if (mode_used) {
            *mode_used = "corners";
        }
        return BBox2D{raw[0], raw[1], raw[2], raw[3]};
    }
    if (mode == BBoxMode::kStrict) {
        throw ValidationError("validation/bbox-strict",
                              "row " + format_row(raw) +
                                  " violates the [x1, y1, x2, y2] format (strict mode)");
    }

    // Lenient: reinterpret as [x, y, w, h], clamp to the canvas, give
    // zero-extent dimensions one pixel.
    std::string used = "xywh";
    const double w = static_cast<double>(canvas_width);
    const double h = static_cast<double>(canvas_height);
    BBox2D box;
    box.x1 = std::clamp(raw[0], 0.0, w);
    box.y1 = std::clamp(raw[1], 0.0, h);
    box.x2 = std::clamp(raw[0] + raw[2], 0.0, w);
    box.y2 = std::clamp(raw[1] + raw[3], 0.0, h);
    if (box.x2 == box.x1) {
        used = "xywh-minsize";
        if (box.x2 + 1.0 <= w) {
            box.x2 += 1.0;
        } else {
            box.x1 -= 1.0;
        }
    }
    if (box.y2 == box.y1) {
        used = "xywh-minsize";
        if (box.y2 + 1.0 <= h) {
            box.y2 += 1.0;
        } else {
            box.y1 -= 1.0;
        }
    }
    if (!(box.x1 >= 0.0 && box.y1 >= 0.0 && box.x1 < box.x2 && box.y1 < box.y2)) {
        throw ValidationError("validation/bbox-unrecoverable",
                              "row " + format_row(raw) + " is unrecoverable in lenient mode");
    }
    if (mode_used) {
        *mode_used = used;
    }
    return box;
}

SceneFile parse_scene_file(const std::string& json_text) {
    const json doc = parse_json(json_text, "scene file");
    if (!doc.is_object()) {
        throw ValidationError("validation/scene-schema", "scene file must be a JSON object");
    }

    SceneFile out;
    if (doc.contains("canvas")) {
        const json& c = doc.at("canvas");
        if (!c.is_array() || c.size() != 2) {
            throw ValidationError("validation/scene-schema", "canvas must be [width, height]");
        }
        out.canvas_width = c[0].get<int>();
        out.canvas_height = c[1].get<int>();
    }
    out.prompt = doc.value("prompt", std::string{});

    if (!doc.contains("entries") || !doc.at("entries").is_array() || doc.at("entries").empty()) {
        throw ValidationError("validation/empty-layout", "scene file needs a non-empty entries array");
    }
    for (const json& e : doc.at("entries")) {
        SceneFileEntry entry;
        if (!e.contains("bbox")) {
            throw ValidationError("validation/scene-schema", "entry lacks a bbox");
        }
        entry.bbox_raw = number_quad(e.at("bbox"), "entry.bbox");
        entry.label = e.value("label", std::string{});
        entry.cloud_path = e.value("cloud", std::string{});
        if (e.contains("transform")) {
            entry.transform = transform_from_json(e.at("transform"));
        }
        out.entries.push_back(std::move(entry));
    }

    out.depth_map_path = doc.value("depth_map", std::string{});
    if (doc.contains("masks")) {
        for (const json& m : doc.at("masks")) {
            out.mask_paths.push_back(m.get<std::string>());
        }
        if (out.mask_paths.size() != out.entries.size()) {
            throw ValidationError("validation/scene-schema",
                                  "masks must list one path per entry");
        }
    }
    if (doc.contains("config")) {
        out.config_json = doc.at("config").dump();
    }

    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (key != "canvas" && key != "prompt" && key != "entries" && key != "depth_map" &&
            key != "masks" && key != "config") {
            throw ValidationError("validation/scene-schema", "unknown scene key '" + key + "'");
        }
    }
    return out;
}

SceneFile load_scene_file(const std::filesystem::path& path) {
    return parse_scene_file(read_file_bytes(path));
}

std::string scene_file_to_json(const SceneFile& file) {
    json doc;
    doc["canvas"] = {file.canvas_width, file.canvas_height};
    doc["prompt"] = file.prompt;
    doc["entries"] = json::array();
    for (const SceneFileEntry& e : file.entries) {
        json entry;
        entry["bbox"] = e.bbox_raw;
        entry["label"] = e.label;
        if (!e.cloud_path.empty()) {
            entry["cloud"] = e.cloud_path;
        }
        if (e.transform.has_value()) {
            entry["transform"] = transform_to_json(*e.transform);
        }
        doc["entries"].push_back(std::move(entry));
    }
    if (!file.depth_map_path.empty()) {
        doc["depth_map"] = file.depth_map_path;
    }
    if (!file.mask_paths.empty()) {
        doc["masks"] = file.mask_paths;
    }
    if (!file.config_json.empty()) {
        doc["config"] = parse_json(file.config_json, "config overrides");
    }
    return doc.dump(2) + "\n";
}

void save_scene_file(const SceneFile& file, const std::filesystem::path& path) {
    atomic_write_file(path, scene_file_to_json(file));
}

LayoutSpec layout_from_scene_file(const SceneFile& file, BBoxMode mode,
                                  LayoutLoadReport* report) {
    LayoutSpec layout;
    layout.canvas_width = file.canvas_width;
    layout.canvas_height = file.canvas_height;
    layout.prompt = file.prompt;
    for (std::size_t i = 0; i < file.entries.size(); ++i) {
        std::string used;
        BBox2D box;
        try {
            box = recover_bbox(file.entries[i].bbox_raw, mode, file.canvas_width,
                               file.canvas_height, &used);
        } catch (const ValidationError& e) {
            throw ValidationError(e.code(),
                                  "entry " + std::to_string(i) + ": " + e.what());
        }
        if (report && used != "corners") {
            report->recovered.push_back({i, file.entries[i].bbox_raw, used});
        }
        layout.entries.push_back({box, file.entries[i].label});
    }
    validate(layout);
    return layout;
}

LayoutSpec load_layout_spec(const std::filesystem::path& path, BBoxMode mode,
                            LayoutLoadReport* report) {
    return layout_from_scene_file(load_scene_file(path), mode, report);
}

SceneBundle load_scene_bundle(const std::filesystem::path& path, BBoxMode mode,
                              LayoutLoadReport* report) {
    return bundle_from_file(load_scene_file(path),
                            path.has_parent_path() ? path.parent_path()
                                                   : std::filesystem::path("."),
                            mode, report);
}

SceneBundle bundle_from_file(const SceneFile& file, const std::filesystem::path& base_dir,
                             BBoxMode mode, LayoutLoadReport* report) {
    SceneBundle bundle;
    bundle.file = file;
    bundle.layout = layout_from_scene_file(bundle.file, mode, report);
    bundle.base_dir = base_dir;

    for (std::size_t i = 0; i < bundle.file.entries.size(); ++i) {
        const SceneFileEntry& entry = bundle.file.entries[i];
        if (entry.cloud_path.empty()) {
            throw ValidationError("validation/missing-cloud-path",
                                  "entry " + std::to_string(i) + " references no cloud");
        }
        SceneInstance inst;
        inst.id = std::to_string(i);
        inst.label = entry.label;
        inst.cloud = normalize_cloud(load_ply(bundle.base_dir / entry.cloud_path)).cloud;
        inst.transform = entry.transform.value_or(InstanceTransform{});
        bundle.scene.instances.push_back(std::move(inst));
    }
    validate(bundle.scene);

    if (!bundle.file.depth_map_path.empty()) {
        if (bundle.file.mask_paths.empty()) {
            throw ValidationError("validation/masks-required",
                                  "a depth map needs per-entry masks");
        }
        DepthInput depth;
        const std::filesystem::path depth_path = bundle.base_dir / bundle.file.depth_map_path;
        depth.depth = depth_path.extension() == ".npy" ? read_npy(depth_path)
                                                       : read_depth_pgm(depth_path);
        for (std::size_t i = 0; i < bundle.file.mask_paths.size(); ++i) {
            MaskImage mask = read_mask_pgm(bundle.base_dir / bundle.file.mask_paths[i]);
            if (mask.width != depth.depth.width || mask.height != depth.depth.height) {
                throw ValidationError("validation/mask-dims",
                                      "mask " + std::to_string(i) + " does not match the depth map");
            }
            // Masks must stay inside their boxes: reject in strict mode,
            // intersect in lenient mode.
            const BBox2D& box = bundle.layout.entries[i].bbox;
            const double sx = static_cast<double>(mask.width) / bundle.layout.canvas_width;
            const double sy = static_cast<double>(mask.height) / bundle.layout.canvas_height;
            for (int y = 0; y < mask.height; ++y) {
                for (int x = 0; x < mask.width; ++x) {
                    if (!mask.at(x, y)) {
                        continue;
                    }
                    const double cx = (x + 0.5) / sx;
                    const double cy = (y + 0.5) / sy;
                    const bool inside =
                        cx >= box.x1 && cx <= box.x2 && cy >= box.y1 && cy <= box.y2;
                    if (!inside) {
                        if (mode == BBoxMode::kStrict) {
                            throw ValidationError("validation/mask-outside-box",
                                                  "mask " + std::to_string(i) +
                                                      " has pixels outside its bbox");
                        }
                        mask.values[mask.index(x, y)] = 0;
                    }
                }
            }
            depth.masks.push_back(std::move(mask));
        }
        validate(depth);
        bundle.depth = std::move(depth);
    }
    return bundle;
}

CameraModel make_camera(const EngineConfig& cfg, int resolution) {
    CameraModel cam;
    cam.fov_deg = cfg.camera_fov_deg;
    cam.width = resolution;
    cam.height = resolution;
    cam.pose = Pose{0.0, 0.0, camera_radius_for_extent(1.0, cfg.camera_fov_deg, cfg.camera_fill)};
    return cam;
}

namespace {

    // Scene-level reference camera: the [-1, 1] canvas maps to the full frame.
    [[nodiscard]] CameraModel make_reference_camera(const EngineConfig& cfg) {
        CameraModel cam;
        cam.fov_deg = cfg.camera_fov_deg;
        cam.width = cfg.loss_render_resolution;
        cam.height = cfg.loss_render_resolution;
        cam.pose = Pose{0.0, 0.0, camera_radius_for_extent(1.0, cfg.camera_fov_deg, 1.0)};
        return cam;
    }

    void apply_layout_overrides(LayoutOptConfig& layout, const json& j) {
        for (const auto& [key, value] : j.items()) {
            if (key == "iterations") {
                layout.iterations = value.get<int>();
            } else if (key == "lr_quaternion") {
                layout.lr_quaternion = value.get<double>();
            } else if (key == "lr_translation_x") {
                layout.lr_translation_x = value.get<double>();
            } else if (key == "lr_translation_y") {
                layout.lr_translation_y = value.get<double>();
            } else if (key == "lr_translation_z") {
                layout.lr_translation_z = value.get<double>();
            } else if (key == "lambda_f") {
                layout.lambda_f = value.get<double>();
            } else if (key == "lambda_c") {
                layout.lambda_c = value.get<double>();
            } else if (key == "guidance") {
                layout.guidance = value.get<std::string>();
            } else if (key == "fd_step") {
                layout.fd_step = value.get<double>();
            } else if (key == "use_adam") {
                layout.use_adam = value.get<bool>();
            } else if (key == "collision") {
                for (const auto& [ck, cv] : value.items()) {
                    if (ck == "symmetrize") {
                        layout.collision.symmetrize = cv.get<bool>();
                    } else if (ck == "frozen_anchor") {
                        layout.collision.frozen_anchor = cv.get<bool>();
                    } else if (ck == "max_points") {
                        layout.collision.max_points = cv.get<std::size_t>();
                    } else {
                        throw ValidationError("validation/unknown-config-key",
                                              "unknown collision key '" + ck + "'");
                    }
                }
            } else {
                throw ValidationError("validation/unknown-config-key",
                                      "unknown layout key '" + key + "'");
            }
        }
    }

    [[nodiscard]] TimestepSchedule schedule_from_json(const json& j) {
        TimestepSchedule schedule;
        if (!j.is_array()) {
            throw ValidationError("validation/config-schema",
                                  "schedule must be a list of {iters, t} phases");
        }
        for (const json& p : j) {
            SchedulePhase phase;
            const json& iters = p.at("iters");
            const json& range = p.at("t");
            phase.begin = iters.at(0).get<int>();
            phase.end = iters.at(1).get<int>();
            phase.t_min = range.at(0).get<double>();
            phase.t_max = range.at(1).get<double>();
            schedule.phases.push_back(phase);
        }
        validate(schedule);
        return schedule;
    }

} // namespace

void apply_config_overrides(EngineConfig& cfg, const std::string& json_text) {
    const json doc = parse_json(json_text, "config");
    if (!doc.is_object()) {
        throw ValidationError("validation/config-schema", "config must be a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (key == "bbox_mode") {
            const std::string mode = value.get<std::string>();
            if (mode == "strict") {
                cfg.bbox_mode = BBoxMode::kStrict;
            } else if (mode == "lenient") {
                cfg.bbox_mode = BBoxMode::kLenient;
            } else {
                throw ValidationError("validation/config-schema",
                                      "bbox_mode must be 'strict' or 'lenient'");
            }
        } else if (key == "pose_grid") {
            for (const auto& [pk, pv] : value.items()) {
                if (pk == "step") {
                    cfg.pose_grid_step_deg = pv.get<double>();
                } else if (pk == "elevation") {
                    cfg.pose_grid_elevation_lo = pv.at(0).get<double>();
                    cfg.pose_grid_elevation_hi = pv.at(1).get<double>();
                } else if (pk == "resolution") {
                    cfg.pose_search_resolution = pv.get<int>();
                } else {
                    throw ValidationError("validation/unknown-config-key",
                                          "unknown pose_grid key '" + pk + "'");
                }
            }
        } else if (key == "camera") {
            for (const auto& [pk, pv] : value.items()) {
                if (pk == "fov") {
                    cfg.camera_fov_deg = pv.get<double>();
                } else if (pk == "fill") {
                    cfg.camera_fill = pv.get<double>();
                } else {
                    throw ValidationError("validation/unknown-config-key",
                                          "unknown camera key '" + pk + "'");
                }
            }
        } else if (key == "recenter_fill") {
            cfg.recenter_fill = value.get<double>();
        } else if (key == "loss_render_resolution") {
            cfg.loss_render_resolution = value.get<int>();
        } else if (key == "seed") {
            cfg.layout.seed = value.get<std::uint64_t>();
        } else if (key == "layout") {
            apply_layout_overrides(cfg.layout, value);
        } else if (key == "schedule") {
            cfg.refine_short.schedule = schedule_from_json(value);
        } else if (key == "schedule_extended") {
            cfg.refine_extended.schedule = schedule_from_json(value);
        } else {
            throw ValidationError("validation/unknown-config-key",
                                  "unknown config key '" + key + "'");
        }
    }
    cfg.layout.reference_camera = make_reference_camera(cfg);
}

EngineConfig load_engine_config(const std::filesystem::path& path) {
    if (path.extension() == ".toml") {
        throw ValidationError("validation/config-format",
                              "TOML configs are not supported; use JSON");
    }
    EngineConfig cfg;
    apply_config_overrides(cfg, read_file_bytes(path));
    return cfg;
}

void initialize_scene_transforms(SceneBundle& bundle, const EngineConfig& cfg) {
    const double post_w = postprocessed_width(bundle.file.canvas_width, cfg.recenter_fill);

    PoseGrid grid;
    CameraModel search_cam;
    const bool with_rotation = bundle.depth.has_value();
    if (with_rotation) {
        search_cam = make_camera(cfg, cfg.pose_search_resolution);
        grid = build_pose_grid(cfg.pose_grid_step_deg, cfg.pose_grid_elevation_lo,
                               cfg.pose_grid_elevation_hi, search_cam.pose.radius);
    }
    const SilhouetteDepthExtractor extractor;

    for (std::size_t i = 0; i < bundle.scene.instances.size(); ++i) {
        const BBox2D& box = bundle.layout.entries[i].bbox;
        InstanceTransform xf;
        xf.scale = init_scale(box, post_w);
        const auto [x, y] =
            init_translation_xy(box, bundle.layout.canvas_width, bundle.layout.canvas_height);
        const double z = bundle.depth ? init_depth_z(*bundle.depth, i) : 0.0;
        xf.translation = Vec3(x, y, z);

        if (with_rotation) {
            const RenderBuffers reference = crop_and_recenter(
                bundle.depth->masks[i], bundle.depth->depth, cfg.pose_search_resolution,
                cfg.recenter_fill);
            const FeatureVec f_ref = extractor.extract(reference);
            const RotationEstimate est = estimate_rotation(bundle.scene.instances[i].cloud, f_ref,
                                                           grid, extractor, search_cam);
            xf.rotation = pose_to_object_rotation(est.pose);
        }

        bundle.scene.instances[i].transform = xf;
        bundle.file.entries[i].transform = xf;
    }
}

LayoutRefineResult refine_scene_layout(SceneBundle& bundle, const EngineConfig& cfg) {
    LayoutOptConfig layout_cfg = cfg.layout;
    layout_cfg.reference_camera = make_reference_camera(cfg);

    std::optional<ReferenceView> reference;
    if (bundle.depth.has_value()) {
        RenderBuffers ref = make_buffers(bundle.depth->depth.width, bundle.depth->depth.height);
        const MaskImage uni = mask_union(bundle.depth->masks);
        for (std::size_t px = 0; px < uni.values.size(); ++px) {
            if (uni.values[px] != 0) {
                ref.silhouette[px] = 1;
                ref.depth[px] = bundle.depth->depth.values[px];
                ref.normal[px] = Vec3(0.0, 0.0, 1.0);
            }
        }
        const SilhouetteDepthExtractor extractor;
        reference = ReferenceView{masked_reference_feature(ref, uni, extractor), std::move(ref)};
    } else {
        // No reference view can be built; the feature term is dropped.
        layout_cfg.lambda_f = 0.0;
        if (layout_cfg.guidance == "reference-feature") {
            layout_cfg.guidance = "stub-zero";
        }
    }

    LayoutRefineResult result =
        refine_layout(bundle.scene, reference, layout_cfg, bundle.layout.prompt);
    bundle.scene = result.scene;
    for (std::size_t i = 0; i < bundle.scene.instances.size(); ++i) {
        bundle.file.entries[i].transform = bundle.scene.instances[i].transform;
    }
    return result;
}

std::string trace_to_json(const OptTrace& trace) {
    json doc;
    doc["rows"] = json::array();
    for (const TraceRow& row : trace.rows) {
        json r;
        r["iteration"] = row.iteration;
        r["total"] = row.total;
        r["ssds"] = row.ssds;
        r["feat"] = row.feat;
        r["col"] = row.col;
        doc["rows"].push_back(std::move(r));
    }
    doc["final_transforms"] = json::array();
    for (const InstanceTransform& xf : trace.final_transforms) {
        doc["final_transforms"].push_back(transform_to_json(xf));
    }
    return doc.dump(2) + "\n";
}

std::string collision_report_to_json(const CollisionReport& report, const Scene& scene) {
    json doc;
    doc["total"] = report.total;
    doc["pairs"] = json::array();
    for (const CollisionPairTerm& pair : report.pairs) {
        json p;
        p["anchor"] = scene.instances[pair.anchor].id;
        p["intruder"] = scene.instances[pair.intruder].id;
        p["loss"] = pair.loss;
        doc["pairs"].push_back(std::move(p));
    }
    doc["gradients"] = json::array();
    for (std::size_t i = 0; i < report.gradients.size(); ++i) {
        const TransformGrad& g = report.gradients[i];
        json entry;
        entry["id"] = scene.instances[i].id;
        entry["rotation"] = {g.rotation.x(), g.rotation.y(), g.rotation.z()};
        entry["translation"] = {g.translation.x(), g.translation.y(), g.translation.z()};
        entry["scale"] = g.scale;
        doc["gradients"].push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

std::string plan_to_csv(const std::vector<PlanEntry>& plan) {
    std::string out = "iteration,t_min,t_max,densify,resolution,position_lr,feature_lr\n";
    char buf[192];
    for (const PlanEntry& e : plan) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%d,%d,%.10g,%.10g\n", e.iteration, e.t_min,
                      e.t_max, e.densify ? 1 : 0, e.resolution, e.position_lr, e.feature_lr);
        out += buf;
    }
    return out;
}

std::string plan_to_json(const std::vector<PlanEntry>& plan) {
    json doc = json::array();
    for (const PlanEntry& e : plan) {
        json entry;
        entry["iteration"] = e.iteration;
        entry["t_min"] = e.t_min;
        entry["t_max"] = e.t_max;
        entry["densify"] = e.densify;
        entry["resolution"] = e.resolution;
        entry["position_lr"] = e.position_lr;
        entry["feature_lr"] = e.feature_lr;
        doc.push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

} // namespace cpl
