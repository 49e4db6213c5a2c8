// Copyright 2026 The dispflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace dispflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of the operation (bad order, negative bound, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Field dimensions are too small for a stencil, or two fields disagree in shape.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Explicit time stepping produced a non-finite state.
class StabilityError : public Error {
public:
    using Error::Error;
};

/// An iterative solver hit its iteration cap before reaching tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, int iterations, double residual)
        : Error(what + " (iterations=" + std::to_string(iterations) +
                ", residual=" + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// Malformed or unsupported file content.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace dispflow
