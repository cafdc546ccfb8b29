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
#include "cpl/file_util.hpp"
#include "cpl/image_io.hpp"
#include "cpl/optimizer.hpp"
#include "cpl/scene_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string bbox_mode; // "", "strict" or "lenient"
};

// defaults -> --config file -> scene-embedded config -> CLI flags
cpl::EngineConfig resolve_config(const GlobalOptions& opts, const cpl::SceneFile* scene) {
    cpl::EngineConfig cfg;
    cpl::apply_config_overrides(cfg, "{}"); // normalizes derived fields
    if (!opts.config_path.empty()) {
        cfg = cpl::load_engine_config(opts.config_path);
    }
    if (scene != nullptr && !scene->config_json.empty()) {
        cpl::apply_config_overrides(cfg, scene->config_json);
    }
    if (opts.seed.has_value()) {
        cfg.layout.seed = *opts.seed;
    }
    if (opts.bbox_mode == "strict") {
        cfg.bbox_mode = cpl::BBoxMode::kStrict;
    } else if (opts.bbox_mode == "lenient") {
        cfg.bbox_mode = cpl::BBoxMode::kLenient;
    } else if (!opts.bbox_mode.empty()) {
        throw cpl::ValidationError("validation/bbox-mode",
                                   "--bbox-mode must be 'strict' or 'lenient'");
    }
    return cfg;
}

cpl::SceneBundle load_bundle(const std::string& scene_path, const cpl::EngineConfig& cfg) {
    const std::filesystem::path path(scene_path);
    const cpl::SceneFile file = cpl::load_scene_file(path);
    return cpl::bundle_from_file(file,
                                 path.has_parent_path() ? path.parent_path()
                                                        : std::filesystem::path("."),
                                 cfg.bbox_mode);
}

cpl::Pose parse_pose(const std::string& spec, double default_radius) {
    std::string s = spec;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    double e = 0.0, a = 0.0, r = default_radius;
    if (!(is >> e >> a)) {
        throw cpl::ValidationError("validation/pose-spec",
                                   "--pose expects 'elevation,azimuth[,radius]'");
    }
    is >> r;
    return cpl::Pose{e, a, r};
}

int run(int argc, char** argv) {
    CLI::App app{"compolayout: lift 2D box layouts into 3D splat scenes and refine them "
                 "with a collision-aware layout loss"};
    app.require_subcommand(1);

    GlobalOptions global;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "RNG seed for reproducible runs")
                         ->envname("COMPOLAYOUT_SEED");
    app.add_option("--config", global.config_path, "JSON configuration file");
    app.add_option("--bbox-mode", global.bbox_mode, "bbox validation: strict or lenient");

    // init
    auto* init_cmd = app.add_subcommand("init", "lift the 2D layout into initial 3D transforms");
    std::string init_scene, init_out;
    init_cmd->add_option("scene", init_scene, "scene JSON")->required();
    init_cmd->add_option("-o,--output", init_out, "output scene JSON")->required();

    // optimize
    auto* opt_cmd = app.add_subcommand("optimize", "run collision-aware layout refinement");
    std::string opt_scene, opt_out, opt_trace_csv, opt_trace_json;
    opt_cmd->add_option("scene", opt_scene, "scene JSON")->required();
    opt_cmd->add_option("-o,--output", opt_out, "output scene JSON")->required();
    opt_cmd->add_option("--trace", opt_trace_csv, "per-iteration loss trace CSV");
    opt_cmd->add_option("--trace-json", opt_trace_json, "per-iteration loss trace JSON");

    // render
    auto* render_cmd = app.add_subcommand("render", "render silhouette/depth/normal buffers");
    std::string render_scene, render_pose, render_prefix;
    int render_resolution = 0;
    render_cmd->add_option("scene", render_scene, "scene JSON")->required();
    render_cmd->add_option("--pose", render_pose, "camera pose 'elevation,azimuth[,radius]'");
    render_cmd->add_option("-o,--output", render_prefix, "output path prefix")->required();
    render_cmd->add_option("--resolution", render_resolution, "image side in pixels");

    // collide
    auto* collide_cmd = app.add_subcommand("collide", "print the collision report as JSON");
    std::string collide_scene;
    collide_cmd->add_option("scene", collide_scene, "scene JSON")->required();

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "dump the instance-refinement plan");
    std::string plan_profile;
    bool plan_json = false;
    plan_cmd->add_option("--profile", plan_profile, "short or extended")->required();
    plan_cmd->add_flag("--json", plan_json, "emit JSON instead of CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    if (seed_opt->count() > 0) {
        global.seed = seed_value;
    }

    if (init_cmd->parsed()) {
        const cpl::SceneFile file = cpl::load_scene_file(init_scene);
        const cpl::EngineConfig cfg = resolve_config(global, &file);
        cpl::SceneBundle bundle = load_bundle(init_scene, cfg);
        if (!bundle.depth.has_value()) {
            std::cerr << "note: no depth map/masks; depth set to 0 and rotation to identity\n";
        }
        cpl::initialize_scene_transforms(bundle, cfg);
        cpl::save_scene_file(bundle.file, init_out);
        return kExitOk;
    }

    if (opt_cmd->parsed()) {
        const cpl::SceneFile file = cpl::load_scene_file(opt_scene);
        const cpl::EngineConfig cfg = resolve_config(global, &file);
        cpl::SceneBundle bundle = load_bundle(opt_scene, cfg);
        if (!bundle.depth.has_value() && cfg.layout.lambda_f > 0.0) {
            std::cerr << "note: no depth map/masks; the feature-level reference loss is dropped\n";
        }
        const cpl::LayoutRefineResult result = cpl::refine_scene_layout(bundle, cfg);
        cpl::save_scene_file(bundle.file, opt_out);
        if (!opt_trace_csv.empty()) {
            cpl::atomic_write_file(opt_trace_csv, cpl::trace_to_csv(result.trace));
        }
        if (!opt_trace_json.empty()) {
            cpl::atomic_write_file(opt_trace_json, cpl::trace_to_json(result.trace));
        }
        if (result.aborted) {
            throw cpl::NumericError("numeric/refine-aborted", result.abort_message);
        }
        return kExitOk;
    }

    if (render_cmd->parsed()) {
        const cpl::SceneFile file = cpl::load_scene_file(render_scene);
        const cpl::EngineConfig cfg = resolve_config(global, &file);
        const cpl::SceneBundle bundle = load_bundle(render_scene, cfg);

        const int resolution =
            render_resolution > 0 ? render_resolution : cfg.loss_render_resolution;
        cpl::CameraModel cam;
        cam.fov_deg = cfg.camera_fov_deg;
        cam.width = resolution;
        cam.height = resolution;
        const double default_radius = cpl::camera_radius_for_extent(1.0, cfg.camera_fov_deg, 1.0);
        cam.pose = render_pose.empty() ? cpl::Pose{0.0, 0.0, default_radius}
                                       : parse_pose(render_pose, default_radius);

        const cpl::RenderBuffers buffers = cpl::render(cpl::compose_scene(bundle.scene), cam);
        cpl::write_buffer_dumps(buffers, render_prefix);
        return kExitOk;
    }

    if (collide_cmd->parsed()) {
        const cpl::SceneFile file = cpl::load_scene_file(collide_scene);
        const cpl::EngineConfig cfg = resolve_config(global, &file);
        const cpl::SceneBundle bundle = load_bundle(collide_scene, cfg);
        cpl::CollisionOptions copts = cfg.layout.collision;
        copts.lambda_c = cfg.layout.lambda_c;
        copts.seed = cfg.layout.seed;
        const cpl::CollisionReport report = cpl::collision_loss_scene(bundle.scene, copts);
        std::cout << cpl::collision_report_to_json(report, bundle.scene);
        return kExitOk;
    }

    if (plan_cmd->parsed()) {
        const cpl::EngineConfig cfg = resolve_config(global, nullptr);
        cpl::InstanceRefineConfig refine;
        if (plan_profile == "short") {
            refine = cfg.refine_short;
        } else if (plan_profile == "extended") {
            refine = cfg.refine_extended;
        } else {
            throw cpl::ValidationError("validation/plan-profile",
                                       "--profile must be 'short' or 'extended'");
        }
        const std::vector<cpl::PlanEntry> plan = cpl::refinement_plan(refine);
        std::cout << (plan_json ? cpl::plan_to_json(plan) : cpl::plan_to_csv(plan));
        return kExitOk;
    }

    return kExitValidation;
}

void print_error(const std::string& code, const std::string& message) {
    nlohmann::json err;
    err["code"] = code;
    err["message"] = message;
    std::cerr << "error: " << err.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const cpl::NumericError& e) {
        print_error(e.code(), e.what());
        return kExitNumeric;
    } catch (const cpl::ValidationError& e) {
        print_error(e.code(), e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        print_error("internal/unhandled", e.what());
        return kExitNumeric;
    }
}
