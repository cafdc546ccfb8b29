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

#include <filesystem>

namespace cpl {

// --- PGM ------------------------------------------------------------------

// P5/P2 grayscale, values scaled to [0, 1] by maxval (16-bit P5 is
// big-endian per the format).
[[nodiscard]] GrayImage read_pgm(const std::filesystem::path& path);

// Bilevel read: nonzero pixels are set.
[[nodiscard]] MaskImage read_mask_pgm(const std::filesystem::path& path);

// P5 maxval 255; set pixels written as 255.
void write_mask_pgm(const MaskImage& mask, const std::filesystem::path& path);

// --- depth dumps ------------------------------------------------------------

// 16-bit P5 with foreground quantized to 1..65535 over [min, max]; 0 marks
// background. The value range lands in a sidecar JSON (path + ".json") so
// the round trip stays within 1e-4 relative.
void write_depth_pgm(const GrayImage& depth, const std::filesystem::path& path);

// Reads a depth map: with a sidecar present, dequantizes (0 -> +inf
// background); otherwise plain [0, 1] grayscale.
[[nodiscard]] GrayImage read_depth_pgm(const std::filesystem::path& path);

// --- NPY -------------------------------------------------------------------

// Minimal reader for 2-D little-endian float32/float64 C-order arrays.
[[nodiscard]] GrayImage read_npy(const std::filesystem::path& path);

// --- PNG -------------------------------------------------------------------

// 8-bit RGB PNG (zlib-compressed). `rgb` is 3 bytes per pixel, row-major.
void write_png_rgb(int width, int height, const std::vector<std::uint8_t>& rgb,
                   const std::filesystem::path& path);

// Normals encoded as RGB via (n + 1) / 2 * 255; background pixels black.
void write_normal_png(const RenderBuffers& buffers, const std::filesystem::path& path);

// Silhouette as a bilevel PGM, depth as quantized PGM + sidecar, normals as
// PNG: <prefix>_silhouette.pgm, <prefix>_depth.pgm(.json), <prefix>_normal.png.
void write_buffer_dumps(const RenderBuffers& buffers, const std::filesystem::path& prefix);

} // namespace cpl
