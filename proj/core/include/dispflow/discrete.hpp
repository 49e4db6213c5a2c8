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
#include <span>
#include <vector>

#include "dispflow/grid.hpp"

namespace dispflow {

/// Integer displacement along `axis`, one entry per line; every entry lies in
/// [-bound, bound].
struct IntShiftField {
    Axis axis = Axis::X1;
    std::vector<int> shifts;
    int bound = 0;
};

struct DiscreteResult {
    ScalarField image;
    IntShiftField shifts;
    double cost_before = 0.0;
    double cost_after = 0.0;
};

/// out(j, r) = img(clamp(j - shifts[r]), r): row r moved right by shifts[r]
/// with edge replication.
ScalarField shift_rows(const ScalarField& img, std::span<const int> shifts);

/// out(j, r) = img(perm[j], r).
ScalarField permute_columns(const ScalarField& img, std::span<const std::size_t> perm);

/// Sum of squared k-th differences across rows (along X2), in samples.
double row_roughness(const ScalarField& img, int k);

/// Sum of squared k-th differences across columns (along X1), in samples.
double column_roughness(const ScalarField& img, int k);

/// Estimates per-row horizontal jitter d with |d| <= max_shift so that
/// shift_rows(original, d) reproduces img, and returns the realigned image.
/// Rows are registered in order against the already corrected rows above.
/// If realignment does not lower row_roughness the identity is returned.
DiscreteResult jitter_correct_rows(const ScalarField& img, int max_shift, int k = 1);

/// Reorders columns within consecutive blocks of width block to reduce
/// column_roughness by repeated best-swap passes. shifts[j] = perm[j] - j.
DiscreteResult block_assign_columns(const ScalarField& img, int block, int k = 1);

}  // namespace dispflow
