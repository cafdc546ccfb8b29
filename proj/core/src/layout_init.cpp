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

#include "cpl/layout_init.hpp"

#include "cpl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cpl {

namespace {

    constexpr double kGridEps = 1e-9;

    [[nodiscard]] bool is_multiple(double value, double step) {
        const double q = value / step;
        return std::abs(q - std::round(q)) < kGridEps;
    }

    [[nodiscard]] std::string pose_tag(const Pose& pose) {
        std::ostringstream os;
        os << " [pose elevation=" << pose.elevation_deg << " azimuth=" << pose.azimuth_deg << "]";
        return os.str();
    }

} // namespace

PoseGrid build_pose_grid(double step_deg, double elevation_lo_deg, double elevation_hi_deg,
                         double camera_radius) {
    if (!(step_deg > 0.0 && step_deg <= 90.0)) {
        throw ValidationError("validation/grid-step", "pose grid step must lie in (0, 90] degrees");
    }
    if (!is_multiple(360.0, step_deg)) {
        throw ValidationError("validation/grid-step", "pose grid step must divide 360 degrees");
    }
    if (elevation_lo_deg > elevation_hi_deg || elevation_lo_deg < -90.0 || elevation_hi_deg > 90.0) {
        throw ValidationError("validation/grid-elevation", "invalid elevation range");
    }
    if (elevation_lo_deg > 0.0 || elevation_hi_deg < 0.0 || !is_multiple(elevation_lo_deg, step_deg)) {
        throw ValidationError("validation/grid-elevation",
                              "elevation range must place 0 degrees on the grid");
    }
    if (!(camera_radius > 0.0)) {
        throw ValidationError("validation/camera-radius", "grid camera radius must be positive");
    }

    PoseGrid grid;
    grid.step_deg = step_deg;
    grid.elevation_lo_deg = elevation_lo_deg;
    grid.elevation_hi_deg = elevation_hi_deg;
    const int azimuth_count = static_cast<int>(std::round(360.0 / step_deg));
    for (double elev = elevation_lo_deg; elev <= elevation_hi_deg + kGridEps; elev += step_deg) {
        for (int a = 0; a < azimuth_count; ++a) {
            grid.poses.push_back(Pose{elev, a * step_deg, camera_radius});
        }
    }
    return grid;
}

void validate(const DepthInput& input) {
    if (input.depth.values.size() !=
        static_cast<std::size_t>(input.depth.width) * static_cast<std::size_t>(input.depth.height)) {
        throw ValidationError("validation/depth-dims", "depth map buffer does not match its dims");
    }
    if (input.masks.empty()) {
        throw ValidationError("validation/no-masks", "depth input needs at least one mask");
    }
    for (std::size_t i = 0; i < input.masks.size(); ++i) {
        const MaskImage& m = input.masks[i];
        if (m.width != input.depth.width || m.height != input.depth.height) {
            throw ValidationError("validation/mask-dims",
                                  "mask " + std::to_string(i) + " does not match the depth map");
        }
        for (int y = 0; y < m.height; ++y) {
            for (int x = 0; x < m.width; ++x) {
                if (m.at(x, y) && !std::isfinite(input.depth.at(x, y))) {
                    throw ValidationError("validation/non-finite-depth",
                                          "depth is not finite under mask " + std::to_string(i));
                }
            }
        }
    }
}

double init_scale(const BBox2D& orig_box, double postprocessed_width) {
    validate(orig_box);
    if (!(postprocessed_width > 0.0)) {
        throw ValidationError("validation/postprocessed-width",
                              "post-processed width must be positive");
    }
    return orig_box.width() / postprocessed_width;
}

double postprocessed_width(int canvas_side, double fill_ratio) {
    if (canvas_side < 1 || !(fill_ratio > 0.0 && fill_ratio <= 1.0)) {
        throw ValidationError("validation/postprocessed-width", "bad recenter-and-pad parameters");
    }
    return std::floor(fill_ratio * canvas_side);
}

std::pair<double, double> canvas_to_scene_xy(double cx, double cy, int canvas_width,
                                             int canvas_height) {
    const double x = 2.0 * cx / canvas_width - 1.0;
    const double y = -(2.0 * cy / canvas_height - 1.0);
    return {x, y};
}

std::pair<double, double> init_translation_xy(const BBox2D& box, int canvas_width,
                                              int canvas_height) {
    validate(box);
    if (box.x1 < 0.0 || box.y1 < 0.0 || box.x2 > canvas_width || box.y2 > canvas_height) {
        throw ValidationError("validation/bbox-out-of-canvas", "box lies outside the canvas");
    }
    return canvas_to_scene_xy(box.center_x(), box.center_y(), canvas_width, canvas_height);
}

double masked_mean_depth(const GrayImage& depth, const MaskImage& mask) {
    if (mask.width != depth.width || mask.height != depth.height) {
        throw ValidationError("validation/mask-dims", "mask does not match the depth map");
    }
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t px = 0; px < mask.values.size(); ++px) {
        if (mask.values[px] != 0) {
            acc += depth.values[px];
            ++count;
        }
    }
    if (count == 0) {
        throw ValidationError("validation/empty-mask", "mask selects no pixels");
    }
    return acc / static_cast<double>(count);
}

double init_depth_z(const DepthInput& input, std::size_t instance) {
    validate(input);
    if (instance >= input.masks.size()) {
        throw ValidationError("validation/instance-index", "instance index outside the mask list");
    }
    std::vector<double> means;
    means.reserve(input.masks.size());
    for (const MaskImage& m : input.masks) {
        means.push_back(masked_mean_depth(input.depth, m));
    }
    const auto [lo_it, hi_it] = std::minmax_element(means.begin(), means.end());
    const double span = *hi_it - *lo_it;
    if (span <= 0.0) {
        return 0.0; // single instance (or equal means): span midpoint
    }
    // smaller raw depth = nearer = larger z
    return (*hi_it + *lo_it - 2.0 * means[instance]) / span;
}

RotationEstimate estimate_rotation(const GaussianCloud& cloud, const FeatureVec& reference_feature,
                                   const PoseGrid& grid, const FeatureExtractor& extractor,
                                   const CameraModel& camera_template) {
    if (grid.poses.empty()) {
        throw ValidationError("validation/empty-grid", "pose grid has no poses");
    }
    RotationEstimate best{grid.poses.front(), -2.0};
    for (const Pose& pose : grid.poses) {
        CameraModel cam = camera_template;
        cam.pose = pose;
        FeatureVec feature;
        try {
            feature = extractor.extract(render(cloud, cam));
        } catch (const NumericError& e) {
            throw NumericError(e.code(), std::string(e.what()) + pose_tag(pose));
        } catch (const ValidationError& e) {
            throw ValidationError(e.code(), std::string(e.what()) + pose_tag(pose));
        }
        const double sim = cosine_similarity(reference_feature, feature);
        if (sim > best.similarity) {
            best = {pose, sim};
        }
    }
    return best;
}

RenderBuffers crop_and_recenter(const MaskImage& mask, const GrayImage& depth, int side,
                                double fill_ratio) {
    if (mask.width != depth.width || mask.height != depth.height) {
        throw ValidationError("validation/mask-dims", "mask does not match the depth map");
    }
    int x_min = mask.width, x_max = -1, y_min = mask.height, y_max = -1;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.at(x, y)) {
                x_min = std::min(x_min, x);
                x_max = std::max(x_max, x);
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        }
    }
    if (x_max < 0) {
        throw ValidationError("validation/empty-mask", "cannot recenter an empty mask");
    }

    const double src_w = x_max - x_min + 1;
    const double src_h = y_max - y_min + 1;
    const double scale = fill_ratio * side / std::max(src_w, src_h);
    const double src_cx = 0.5 * (x_min + x_max + 1);
    const double src_cy = 0.5 * (y_min + y_max + 1);

    RenderBuffers out = make_buffers(side, side);
    for (int ty = 0; ty < side; ++ty) {
        for (int tx = 0; tx < side; ++tx) {
            const int sx = static_cast<int>(std::floor(src_cx + ((tx + 0.5) - 0.5 * side) / scale));
            const int sy = static_cast<int>(std::floor(src_cy + ((ty + 0.5) - 0.5 * side) / scale));
            if (sx < 0 || sx >= mask.width || sy < 0 || sy >= mask.height || !mask.at(sx, sy)) {
                continue;
            }
            const std::size_t px = out.index(tx, ty);
            out.silhouette[px] = 1;
            out.depth[px] = depth.at(sx, sy);
            out.normal[px] = Vec3(0.0, 0.0, 1.0); // descriptor ignores normals
        }
    }
    return out;
}

} // namespace cpl
