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

#include <cstdint>
#include <vector>

namespace cpl {

// Row-major scalar image (depth maps and similar).
struct GrayImage {
    int width{0};
    int height{0};
    std::vector<double> values;

    [[nodiscard]] std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    [[nodiscard]] double at(int x, int y) const { return values[index(x, y)]; }
};

// Row-major bilevel image; nonzero = set.
struct MaskImage {
    int width{0};
    int height{0};
    std::vector<std::uint8_t> values;

    [[nodiscard]] std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    [[nodiscard]] bool at(int x, int y) const { return values[index(x, y)] != 0; }
    [[nodiscard]] std::size_t set_count() const {
        std::size_t n = 0;
        for (std::uint8_t v : values) {
            n += (v != 0);
        }
        return n;
    }
};

} // namespace cpl
