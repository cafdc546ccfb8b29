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

#include "cpl/image_io.hpp"

#include "cpl/errors.hpp"
#include "cpl/file_util.hpp"

#include <json.hpp>
#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace cpl {

namespace {

    using nlohmann::json;

    struct PgmHeader {
        bool binary;
        int width;
        int height;
        int maxval;
        std::size_t data_offset;
    };

    // Parses P2/P5 headers, skipping comments.
    [[nodiscard]] PgmHeader parse_pgm_header(const std::string& bytes,
                                             const std::filesystem::path& path) {
        if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
            throw ValidationError("validation/pgm-format", path.string() + ": not a P2/P5 PGM");
        }
        PgmHeader h{};
        h.binary = bytes[1] == '5';

        std::size_t pos = 2;
        auto next_token = [&]() -> long {
            for (;;) {
                while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                    ++pos;
                }
                if (pos < bytes.size() && bytes[pos] == '#') {
                    while (pos < bytes.size() && bytes[pos] != '\n') {
                        ++pos;
                    }
                    continue;
                }
                break;
            }
            std::size_t start = pos;
            while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            }
            if (start == pos) {
                throw ValidationError("validation/pgm-format", path.string() + ": truncated header");
            }
            return std::stol(bytes.substr(start, pos - start));
        };

        h.width = static_cast<int>(next_token());
        h.height = static_cast<int>(next_token());
        h.maxval = static_cast<int>(next_token());
        if (h.width < 1 || h.height < 1 || h.maxval < 1 || h.maxval > 65535) {
            throw ValidationError("validation/pgm-format", path.string() + ": bad PGM dimensions");
        }
        ++pos; // single whitespace after maxval
        h.data_offset = pos;
        return h;
    }

    [[nodiscard]] std::vector<std::uint32_t> read_pgm_raw(const std::filesystem::path& path,
                                                          PgmHeader& header) {
        const std::string bytes = read_file_bytes(path);
        header = parse_pgm_header(bytes, path);
        const std::size_t n =
            static_cast<std::size_t>(header.width) * static_cast<std::size_t>(header.height);
        std::vector<std::uint32_t> out(n);

        if (header.binary) {
            const std::size_t bpp = header.maxval > 255 ? 2 : 1;
            if (header.data_offset + n * bpp > bytes.size()) {
                throw ValidationError("validation/pgm-truncated", path.string() + ": pixel data truncated");
            }
            const unsigned char* p =
                reinterpret_cast<const unsigned char*>(bytes.data()) + header.data_offset;
            for (std::size_t i = 0; i < n; ++i) {
                if (bpp == 2) {
                    out[i] = static_cast<std::uint32_t>(p[2 * i]) << 8 | p[2 * i + 1]; // big-endian
                } else {
                    out[i] = p[i];
                }
            }
        } else {
            std::istringstream is(bytes.substr(header.data_offset));
            for (std::size_t i = 0; i < n; ++i) {
                if (!(is >> out[i])) {
                    throw ValidationError("validation/pgm-truncated", path.string() + ": pixel data truncated");
                }
            }
        }
        return out;
    }

    void append_be32(std::string& out, std::uint32_t v) {
        out.push_back(static_cast<char>(v >> 24));
        out.push_back(static_cast<char>(v >> 16));
        out.push_back(static_cast<char>(v >> 8));
        out.push_back(static_cast<char>(v));
    }

    void append_png_chunk(std::string& out, const char type[4], const std::string& data) {
        append_be32(out, static_cast<std::uint32_t>(data.size()));
        std::string body(type, 4);
        body += data;
        out += body;
        const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                               static_cast<uInt>(body.size()));
        append_be32(out, static_cast<std::uint32_t>(crc));
    }

} // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    PgmHeader header{};
    const std::vector<std::uint32_t> raw = read_pgm_raw(path, header);
    GrayImage out{header.width, header.height, {}};
    out.values.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out.values[i] = static_cast<double>(raw[i]) / header.maxval;
    }
    return out;
}

MaskImage read_mask_pgm(const std::filesystem::path& path) {
    PgmHeader header{};
    const std::vector<std::uint32_t> raw = read_pgm_raw(path, header);
    MaskImage out{header.width, header.height, {}};
    out.values.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out.values[i] = raw[i] != 0 ? 1 : 0;
    }
    return out;
}

void write_mask_pgm(const MaskImage& mask, const std::filesystem::path& path) {
    std::string out = "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) +
                      "\n255\n";
    out.reserve(out.size() + mask.values.size());
    for (std::uint8_t v : mask.values) {
        out.push_back(v != 0 ? static_cast<char>(255) : 0);
    }
    atomic_write_file(path, out);
}

void write_depth_pgm(const GrayImage& depth, const std::filesystem::path& path) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : depth.values) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const bool any_fg = std::isfinite(lo);
    if (!any_fg) {
        lo = 0.0;
        hi = 1.0;
    }
    const double span = hi > lo ? hi - lo : 1.0;

    std::string out = "P5\n" + std::to_string(depth.width) + " " + std::to_string(depth.height) +
                      "\n65535\n";
    for (double v : depth.values) {
        std::uint32_t q = 0; // background
        if (std::isfinite(v)) {
            q = 1 + static_cast<std::uint32_t>(std::lround((v - lo) / span * 65534.0));
        }
        out.push_back(static_cast<char>(q >> 8));
        out.push_back(static_cast<char>(q & 0xff));
    }
    atomic_write_file(path, out);

    json sidecar;
    sidecar["min"] = lo;
    sidecar["max"] = hi;
    sidecar["background"] = 0;
    atomic_write_file(path.string() + ".json", sidecar.dump(2) + "\n");
}

GrayImage read_depth_pgm(const std::filesystem::path& path) {
    const std::filesystem::path sidecar_path = path.string() + ".json";
    if (!std::filesystem::exists(sidecar_path)) {
        return read_pgm(path);
    }
    json sidecar;
    try {
        sidecar = json::parse(read_file_bytes(sidecar_path));
    } catch (const json::exception& e) {
        throw ValidationError("validation/sidecar-parse", sidecar_path.string() + ": " + e.what());
    }
    const double lo = sidecar.at("min").get<double>();
    const double hi = sidecar.at("max").get<double>();
    const double span = hi > lo ? hi - lo : 1.0;

    PgmHeader header{};
    const std::vector<std::uint32_t> raw = read_pgm_raw(path, header);
    GrayImage out{header.width, header.height, {}};
    out.values.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out.values[i] = raw[i] == 0 ? std::numeric_limits<double>::infinity()
                                    : lo + (static_cast<double>(raw[i]) - 1.0) / 65534.0 * span;
    }
    return out;
}

GrayImage read_npy(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);
    if (bytes.size() < 10 || std::memcmp(bytes.data(), "\x93NUMPY", 6) != 0) {
        throw ValidationError("validation/npy-format", path.string() + ": not an NPY file");
    }
    const unsigned char major = static_cast<unsigned char>(bytes[6]);
    std::size_t header_len = 0;
    std::size_t header_start = 0;
    if (major == 1) {
        std::uint16_t len;
        std::memcpy(&len, bytes.data() + 8, 2);
        header_len = len;
        header_start = 10;
    } else if (major == 2) {
        std::uint32_t len;
        std::memcpy(&len, bytes.data() + 8, 4);
        header_len = len;
        header_start = 12;
    } else {
        throw ValidationError("validation/npy-format", path.string() + ": unsupported NPY version");
    }
    if (header_start + header_len > bytes.size()) {
        throw ValidationError("validation/npy-format", path.string() + ": truncated header");
    }
    const std::string header = bytes.substr(header_start, header_len);

    auto find_value = [&](const std::string& key) -> std::string {
        const std::size_t k = header.find("'" + key + "'");
        if (k == std::string::npos) {
            throw ValidationError("validation/npy-format", path.string() + ": header lacks " + key);
        }
        std::size_t colon = header.find(':', k);
        return header.substr(colon + 1);
    };

    const std::string descr = find_value("descr");
    bool f64;
    if (descr.find("'<f8'") != std::string::npos) {
        f64 = true;
    } else if (descr.find("'<f4'") != std::string::npos) {
        f64 = false;
    } else {
        throw ValidationError("validation/npy-format",
                              path.string() + ": only little-endian float32/float64 supported");
    }
    if (find_value("fortran_order").find("False") == std::string::npos) {
        throw ValidationError("validation/npy-format", path.string() + ": fortran order unsupported");
    }

    const std::string shape_str = find_value("shape");
    const std::size_t open = shape_str.find('(');
    const std::size_t close = shape_str.find(')');
    if (open == std::string::npos || close == std::string::npos) {
        throw ValidationError("validation/npy-format", path.string() + ": bad shape");
    }
    int rows = 0, cols = 0;
    {
        std::string inner = shape_str.substr(open + 1, close - open - 1);
        std::replace(inner.begin(), inner.end(), ',', ' ');
        std::istringstream is(inner);
        if (!(is >> rows >> cols) || rows < 1 || cols < 1) {
            throw ValidationError("validation/npy-format", path.string() + ": need a 2-D array");
        }
    }

    const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    const std::size_t data_start = header_start + header_len;
    const std::size_t elem = f64 ? 8 : 4;
    if (data_start + n * elem > bytes.size()) {
        throw ValidationError("validation/npy-format", path.string() + ": truncated data");
    }

    GrayImage out{cols, rows, {}};
    out.values.resize(n);
    const char* p = bytes.data() + data_start;
    for (std::size_t i = 0; i < n; ++i) {
        if (f64) {
            double v;
            std::memcpy(&v, p + i * 8, 8);
            out.values[i] = v;
        } else {
            float v;
            std::memcpy(&v, p + i * 4, 4);
            out.values[i] = v;
        }
    }
    return out;
}

void write_png_rgb(int width, int height, const std::vector<std::uint8_t>& rgb,
                   const std::filesystem::path& path) {
    const std::size_t expected =
        3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (rgb.size() != expected) {
        throw ValidationError("validation/png-size", "rgb buffer does not match width*height*3");
    }

    // filter byte 0 in front of every scanline
    std::string raw;
    raw.reserve(expected + static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        raw.append(reinterpret_cast<const char*>(rgb.data()) +
                       3 * static_cast<std::size_t>(y) * static_cast<std::size_t>(width),
                   3 * static_cast<std::size_t>(width));
    }

    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::string compressed(compressed_size, '\0');
    if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &compressed_size,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  6) != Z_OK) {
        throw NumericError("numeric/png-compress", "zlib compression failed");
    }
    compressed.resize(compressed_size);

    std::string out("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    append_be32(ihdr, static_cast<std::uint32_t>(width));
    append_be32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    append_png_chunk(out, "IHDR", ihdr);
    append_png_chunk(out, "IDAT", compressed);
    append_png_chunk(out, "IEND", "");
    atomic_write_file(path, out);
}

void write_normal_png(const RenderBuffers& buffers, const std::filesystem::path& path) {
    std::vector<std::uint8_t> rgb(3 * buffers.normal.size(), 0);
    for (std::size_t i = 0; i < buffers.normal.size(); ++i) {
        if (buffers.silhouette[i] == 0) {
            continue; // background stays black
        }
        for (int c = 0; c < 3; ++c) {
            const double v = (buffers.normal[i][c] + 1.0) * 0.5 * 255.0;
            rgb[3 * i + c] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
        }
    }
    write_png_rgb(buffers.width, buffers.height, rgb, path);
}

void write_buffer_dumps(const RenderBuffers& buffers, const std::filesystem::path& prefix) {
    MaskImage sil{buffers.width, buffers.height, buffers.silhouette};
    write_mask_pgm(sil, prefix.string() + "_silhouette.pgm");
    GrayImage depth{buffers.width, buffers.height, buffers.depth};
    write_depth_pgm(depth, prefix.string() + "_depth.pgm");
    write_normal_png(buffers, prefix.string() + "_normal.png");
}

} // namespace cpl
