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

#include "cpl/ply_io.hpp"

#include "cpl/errors.hpp"
#include "cpl/file_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

namespace cpl {

namespace {

    enum class PropType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

    [[nodiscard]] std::size_t prop_size(PropType t) {
        switch (t) {
        case PropType::kInt8:
        case PropType::kUInt8:
            return 1;
        case PropType::kInt16:
        case PropType::kUInt16:
            return 2;
        case PropType::kInt32:
        case PropType::kUInt32:
        case PropType::kFloat32:
            return 4;
        case PropType::kFloat64:
            return 8;
        }
        return 0;
    }

    [[nodiscard]] PropType parse_prop_type(const std::string& name) {
        if (name == "char" || name == "int8") return PropType::kInt8;
        if (name == "uchar" || name == "uint8") return PropType::kUInt8;
        if (name == "short" || name == "int16") return PropType::kInt16;
        if (name == "ushort" || name == "uint16") return PropType::kUInt16;
        if (name == "int" || name == "int32") return PropType::kInt32;
        if (name == "uint" || name == "uint32") return PropType::kUInt32;
        if (name == "float" || name == "float32") return PropType::kFloat32;
        if (name == "double" || name == "float64") return PropType::kFloat64;
        throw ValidationError("validation/ply-format", "unsupported PLY property type '" + name + "'");
    }

    struct Property {
        std::string name;
        PropType type;
    };

    // Reads one binary value as double (little-endian host assumed).
    [[nodiscard]] double read_binary_value(const char* p, PropType t) {
        switch (t) {
        case PropType::kInt8: {
            std::int8_t v;
            std::memcpy(&v, p, 1);
            return v;
        }
        case PropType::kUInt8: {
            std::uint8_t v;
            std::memcpy(&v, p, 1);
            return v;
        }
        case PropType::kInt16: {
            std::int16_t v;
            std::memcpy(&v, p, 2);
            return v;
        }
        case PropType::kUInt16: {
            std::uint16_t v;
            std::memcpy(&v, p, 2);
            return v;
        }
        case PropType::kInt32: {
            std::int32_t v;
            std::memcpy(&v, p, 4);
            return v;
        }
        case PropType::kUInt32: {
            std::uint32_t v;
            std::memcpy(&v, p, 4);
            return v;
        }
        case PropType::kFloat32: {
            float v;
            std::memcpy(&v, p, 4);
            return v;
        }
        case PropType::kFloat64: {
            double v;
            std::memcpy(&v, p, 8);
            return v;
        }
        }
        return 0.0;
    }

    [[nodiscard]] double color_to_unit(double v, PropType t) {
        return t == PropType::kUInt8 ? v / 255.0 : v;
    }

} // namespace

GaussianCloud load_ply(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);

    // --- header ---
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        const std::size_t eol = bytes.find('\n', pos);
        if (eol == std::string::npos) {
            throw ValidationError("validation/ply-format", "unterminated PLY header");
        }
        std::string line = bytes.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        pos = eol + 1;
        return line;
    };

    if (next_line() != "ply") {
        throw ValidationError("validation/ply-format", "missing 'ply' magic");
    }
    bool binary = false;
    bool in_vertex = false;
    bool seen_vertex = false;
    std::size_t vertex_count = 0;
    std::vector<Property> props;

    for (;;) {
        const std::string line = next_line();
        std::istringstream is(line);
        std::string word;
        is >> word;
        if (word == "comment" || word == "obj_info" || word.empty()) {
            continue;
        }
        if (word == "format") {
            std::string fmt;
            is >> fmt;
            if (fmt == "binary_little_endian") {
                binary = true;
            } else if (fmt == "ascii") {
                binary = false;
            } else {
                throw ValidationError("validation/ply-format", "unsupported PLY format '" + fmt + "'");
            }
            continue;
        }
        if (word == "element") {
            std::string name;
            std::size_t count = 0;
            is >> name >> count;
            if (name == "vertex") {
                in_vertex = true;
                seen_vertex = true;
                vertex_count = count;
            } else {
                if (!seen_vertex) {
                    throw ValidationError("validation/ply-format",
                                          "element '" + name + "' precedes the vertex list");
                }
                in_vertex = false; // trailing elements are ignored
            }
            continue;
        }
        if (word == "property") {
            std::string type, name;
            is >> type >> name;
            if (type == "list") {
                if (in_vertex) {
                    throw ValidationError("validation/ply-format",
                                          "list properties on vertices are unsupported");
                }
                continue;
            }
            if (in_vertex) {
                props.push_back({name, parse_prop_type(type)});
            }
            continue;
        }
        if (word == "end_header") {
            break;
        }
        throw ValidationError("validation/ply-format", "unrecognized header line '" + line + "'");
    }

    if (!seen_vertex) {
        throw ValidationError("validation/ply-format", "no vertex element");
    }
    if (vertex_count == 0) {
        throw ValidationError("validation/empty-cloud", "PLY contains zero vertices");
    }

    auto find_prop = [&](const char* name) -> int {
        for (std::size_t i = 0; i < props.size(); ++i) {
            if (props[i].name == name) {
                return static_cast<int>(i);
            }
        }
        return -1;
    };
    const int ix = find_prop("x"), iy = find_prop("y"), iz = find_prop("z");
    if (ix < 0 || iy < 0 || iz < 0) {
        throw ValidationError("validation/ply-format", "vertex element lacks x/y/z");
    }
    const int ir = find_prop("radius");
    const int io = find_prop("opacity");
    const int ired = find_prop("red"), igreen = find_prop("green"), iblue = find_prop("blue");

    GaussianCloud cloud;
    cloud.points.reserve(vertex_count);
    cloud.radii.reserve(vertex_count);
    cloud.opacities.reserve(vertex_count);
    cloud.colors.reserve(vertex_count);

    std::vector<double> row(props.size());
    if (binary) {
        std::size_t row_size = 0;
        for (const Property& p : props) {
            row_size += prop_size(p.type);
        }
        if (pos + row_size * vertex_count > bytes.size()) {
            throw ValidationError("validation/ply-truncated", "binary vertex data is truncated");
        }
        for (std::size_t v = 0; v < vertex_count; ++v) {
            const char* p = bytes.data() + pos + v * row_size;
            for (std::size_t c = 0; c < props.size(); ++c) {
                row[c] = read_binary_value(p, props[c].type);
                p += prop_size(props[c].type);
            }
            cloud.points.emplace_back(row[ix], row[iy], row[iz]);
            cloud.radii.push_back(ir >= 0 ? row[ir] : 0.01);
            cloud.opacities.push_back(io >= 0 ? row[io] : 1.0);
            if (ired >= 0 && igreen >= 0 && iblue >= 0) {
                cloud.colors.emplace_back(color_to_unit(row[ired], props[ired].type),
                                          color_to_unit(row[igreen], props[igreen].type),
                                          color_to_unit(row[iblue], props[iblue].type));
            } else {
                cloud.colors.emplace_back(0.5, 0.5, 0.5);
            }
        }
    } else {
        std::istringstream is(bytes.substr(pos));
        for (std::size_t v = 0; v < vertex_count; ++v) {
            for (std::size_t c = 0; c < props.size(); ++c) {
                if (!(is >> row[c])) {
                    throw ValidationError("validation/ply-truncated", "ASCII vertex data is truncated");
                }
            }
            cloud.points.emplace_back(row[ix], row[iy], row[iz]);
            cloud.radii.push_back(ir >= 0 ? row[ir] : 0.01);
            cloud.opacities.push_back(io >= 0 ? row[io] : 1.0);
            if (ired >= 0 && igreen >= 0 && iblue >= 0) {
                cloud.colors.emplace_back(color_to_unit(row[ired], props[ired].type),
                                          color_to_unit(row[igreen], props[igreen].type),
                                          color_to_unit(row[iblue], props[iblue].type));
            } else {
                cloud.colors.emplace_back(0.5, 0.5, 0.5);
            }
        }
    }

    validate(cloud);
    return cloud;
}

void save_ply(const GaussianCloud& cloud, const std::filesystem::path& path, PlyFormat format) {
    validate(cloud);

    std::string out;
    out += "ply\n";
    out += format == PlyFormat::kBinaryLittleEndian ? "format binary_little_endian 1.0\n"
                                                    : "format ascii 1.0\n";
    out += "element vertex " + std::to_string(cloud.points.size()) + "\n";
    out += "property double x\nproperty double y\nproperty double z\n";
    out += "property double radius\nproperty double opacity\n";
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "end_header\n";

    auto quantize = [](double c) {
        return static_cast<unsigned char>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
    };

    if (format == PlyFormat::kBinaryLittleEndian) {
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            const double vals[5] = {cloud.points[i].x(), cloud.points[i].y(), cloud.points[i].z(),
                                    cloud.radii[i], cloud.opacities[i]};
            char buf[5 * sizeof(double)];
            std::memcpy(buf, vals, sizeof(buf));
            out.append(buf, sizeof(buf));
            const unsigned char rgb[3] = {quantize(cloud.colors[i].x()),
                                          quantize(cloud.colors[i].y()),
                                          quantize(cloud.colors[i].z())};
            out.append(reinterpret_cast<const char*>(rgb), 3);
        }
    } else {
        char buf[256];
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %d %d %d\n",
                          cloud.points[i].x(), cloud.points[i].y(), cloud.points[i].z(),
                          cloud.radii[i], cloud.opacities[i], quantize(cloud.colors[i].x()),
                          quantize(cloud.colors[i].y()), quantize(cloud.colors[i].z()));
            out += buf;
        }
    }

    atomic_write_file(path, out);
}

} // namespace cpl
