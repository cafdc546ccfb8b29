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

#include "cpl/scene_model.hpp"

#include <filesystem>

namespace cpl {

enum class PlyFormat {
    kBinaryLittleEndian, // positions stored as float64, bit-exact round trips
    kAscii
};

// Reads an ASCII or binary-little-endian PLY. x/y/z are required (float or
// double); radius, opacity and red/green/blue are optional and default to
// 0.01, 1 and (0.5, 0.5, 0.5). uchar colors are mapped to [0, 1]. Unknown
// vertex properties are skipped; elements after the vertex list are ignored.
[[nodiscard]] GaussianCloud load_ply(const std::filesystem::path& path);

void save_ply(const GaussianCloud& cloud, const std::filesystem::path& path,
              PlyFormat format = PlyFormat::kBinaryLittleEndian);

} // namespace cpl
