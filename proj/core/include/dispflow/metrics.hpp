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

#include <optional>
#include <string>
#include <vector>

#include "dispflow/grid.hpp"

namespace dispflow {

/// Quality numbers for one result. Optional entries are absent when they do
/// not apply or are undefined.
struct MetricReport {
    double rmse = 0.0;
    std::optional<double> psnr;    ///< +inf when rmse == 0; absent when the reference range is 0
    std::optional<double> rel_l2;  ///< absent when the reference has zero norm
    std::optional<double> fwhm;    ///< mean strip width over interior rows, in samples
    std::optional<double> interface_variance;  ///< variance of per-row interface position, in samples^2
};

/// Compares a against the reference b. RMSE = ||a - b|| / sqrt(N),
/// PSNR = 20 log10(range(b) / RMSE), rel_l2 = ||a - b|| / ||b||.
MetricReport metrics(const ScalarField& a, const ScalarField& b);

/// Width at half maximum of the peak in row r, with linear interpolation of
/// both crossings. The half level is midway between the row min and max.
double row_fwhm(const ScalarField& f, std::size_t r);
/// Mean row_fwhm over rows 1 .. n2-2.
double strip_fwhm(const ScalarField& f);

/// Per-row interface location of a bright-left/dark-right image: the count
/// of samples covered when values are normalized to [0, 1] by the global
/// min and max.
std::vector<double> interface_positions(const ScalarField& f);
double interface_variance(const ScalarField& f);

/// "inf", "undefined" or the number with 17 significant digits.
std::string format_metric(const std::optional<double>& v);

}  // namespace dispflow
