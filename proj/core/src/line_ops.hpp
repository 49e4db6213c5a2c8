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

#include <cstddef>

#include "dispflow/grid.hpp"

namespace dispflow::detail {

// Strided addressing of the 1D lines of a field along one axis.
struct LineLayout {
    std::size_t count;   // number of lines
    std::size_t length;  // samples per line
    std::size_t stride;  // distance between consecutive samples of a line

    std::size_t base(std::size_t line, std::size_t n1) const noexcept {
        return stride == 1 ? line * n1 : line;
    }
};

inline LineLayout line_layout(const ScalarField& f, Axis axis) noexcept {
    if (axis == Axis::X1) return {f.n2(), f.n1(), 1};
    return {f.n1(), f.n2(), f.n1()};
}

}  // namespace dispflow::detail
