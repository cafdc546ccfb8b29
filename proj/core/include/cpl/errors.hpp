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

#include <stdexcept>
#include <string>

namespace cpl {

// Base of all library errors. `code()` is a stable, machine-readable slug
// (e.g. "validation/bbox-out-of-canvas") that the CLI prints on stderr.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Bad inputs: malformed files, violated invariants, out-of-range parameters.
// Maps to CLI exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Numerical failures: non-finite results, degenerate geometry mid-compute.
// Maps to CLI exit code 2.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace cpl
