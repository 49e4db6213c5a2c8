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

#include "dispflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dispflow/error.hpp"

namespace dispflow {

MetricReport metrics(const ScalarField& a, const ScalarField& b) {
    if (!a.same_shape(b)) throw DimensionError("metrics needs fields of equal shape");
    double se = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        se += d * d;
        sb += b.values()[i] * b.values()[i];
    }
    MetricReport r;
    r.rmse = std::sqrt(se / static_cast<double>(a.size()));
    const double range = b.dynamic_range();
    if (r.rmse == 0.0) r.psnr = std::numeric_limits<double>::infinity();
    else if (range > 0.0) r.psnr = 20.0 * std::log10(range / r.rmse);
    if (sb > 0.0) r.rel_l2 = std::sqrt(se / sb);
    return r;
}

double row_fwhm(const ScalarField& f, std::size_t r) {
    if (r >= f.n2()) throw DimensionError("row index out of range");
    const auto row = f.row(r);
    const auto peak = std::max_element(row.begin(), row.end());
    const double hi = *peak, lo = *std::min_element(row.begin(), row.end());
    if (!(hi > lo)) return 0.0;
    const double half = lo + 0.5 * (hi - lo);
    const auto n = static_cast<long>(row.size());
    const long p = peak - row.begin();

    double left = -0.5;
    for (long j = p; j > 0; --j) {
        if (row[static_cast<std::size_t>(j - 1)] < half) {
            const double a = row[static_cast<std::size_t>(j - 1)], b = row[static_cast<std::size_t>(j)];
            left = static_cast<double>(j - 1) + (half - a) / (b - a);
            break;
        }
    }
    double right = static_cast<double>(n) - 0.5;
    for (long j = p; j + 1 < n; ++j) {
        if (row[static_cast<std::size_t>(j + 1)] < half) {
            const double a = row[static_cast<std::size_t>(j)], b = row[static_cast<std::size_t>(j + 1)];
            right = static_cast<double>(j) + (a - half) / (a - b);
            break;
        }
    }
    return right - left;
}

double strip_fwhm(const ScalarField& f) {
    if (f.n2() < 3) throw DimensionError("strip_fwhm needs at least three rows");
    double acc = 0.0;
    for (std::size_t r = 1; r + 1 < f.n2(); ++r) acc += row_fwhm(f, r);
    return acc / static_cast<double>(f.n2() - 2);
}

std::vector<double> interface_positions(const ScalarField& f) {
    const double lo = f.min(), range = f.dynamic_range();
    std::vector<double> pos(f.n2(), 0.0);
    if (range == 0.0) return pos;
    for (std::size_t r = 0; r < f.n2(); ++r)
        for (double v : f.row(r)) pos[r] += (v - lo) / range;
    return pos;
}

double interface_variance(const ScalarField& f) {
    const auto pos = interface_positions(f);
    double mean = 0.0;
    for (double p : pos) mean += p;
    mean /= static_cast<double>(pos.size());
    double var = 0.0;
    for (double p : pos) var += (p - mean) * (p - mean);
    return var / static_cast<double>(pos.size());
}

std::string format_metric(const std::optional<double>& v) {
    if (!v) return "undefined";
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

}  // namespace dispflow
