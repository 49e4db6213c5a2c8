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

#include "dispflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dispflow/error.hpp"
#include "line_ops.hpp"

namespace dispflow {

using detail::line_layout;

ScalarField::ScalarField(std::size_t n1, std::size_t n2)
    : ScalarField(n1, n2, n1 ? 1.0 / static_cast<double>(n1) : 1.0,
                  n2 ? 1.0 / static_cast<double>(n2) : 1.0) {}

ScalarField::ScalarField(std::size_t n1, std::size_t n2, double dx1, double dx2)
    : ScalarField(n1, n2, dx1, dx2, std::vector<double>(n1 * n2, 0.0)) {}

ScalarField::ScalarField(std::size_t n1, std::size_t n2, double dx1, double dx2,
                         std::vector<double> values)
    : n1_(n1), n2_(n2), dx1_(dx1), dx2_(dx2), values_(std::move(values)) {
    if (!(dx1 > 0.0) || !(dx2 > 0.0) || !std::isfinite(dx1) || !std::isfinite(dx2))
        throw InvalidArgument("grid spacing must be positive and finite");
    if (values_.size() != n1 * n2)
        throw DimensionError("value count " + std::to_string(values_.size()) +
                             " does not match " + std::to_string(n1) + "x" + std::to_string(n2));
}

bool ScalarField::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::min() const {
    if (values_.empty()) return 0.0;
    return *std::min_element(values_.begin(), values_.end());
}

double ScalarField::max() const {
    if (values_.empty()) return 0.0;
    return *std::max_element(values_.begin(), values_.end());
}

double ScalarField::dynamic_range() const { return max() - min(); }

ScalarField& ScalarField::operator+=(const ScalarField& rhs) {
    if (!same_shape(rhs)) throw DimensionError("field shapes differ in +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += rhs.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& rhs) {
    if (!same_shape(rhs)) throw DimensionError("field shapes differ in -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= rhs.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

void require_stencil(const ScalarField& f, Axis axis, int k) {
    if (k != 1 && k != 2) throw InvalidArgument("derivative order must be 1 or 2, got " + std::to_string(k));
    const std::size_t need = static_cast<std::size_t>(2 * k + 1);
    if (f.extent(axis) < need)
        throw DimensionError("order-" + std::to_string(k) + " stencil needs at least " +
                             std::to_string(need) + " samples along the axis, field has " +
                             std::to_string(f.extent(axis)));
}

// ---------------------------------------------------------------------------
// Ghost extension

double GhostExtended::at(std::ptrdiff_t i1, std::ptrdiff_t i2) const {
    const auto w = static_cast<std::ptrdiff_t>(width);
    if (axis == Axis::X1) return padded(static_cast<std::size_t>(i1 + w), static_cast<std::size_t>(i2));
    return padded(static_cast<std::size_t>(i1), static_cast<std::size_t>(i2 + w));
}

ScalarField GhostExtended::interior() const {
    const std::size_t w = static_cast<std::size_t>(width);
    const std::size_t n1 = axis == Axis::X1 ? padded.n1() - 2 * w : padded.n1();
    const std::size_t n2 = axis == Axis::X2 ? padded.n2() - 2 * w : padded.n2();
    ScalarField out(n1, n2, padded.dx1(), padded.dx2());
    for (std::size_t i2 = 0; i2 < n2; ++i2)
        for (std::size_t i1 = 0; i1 < n1; ++i1)
            out(i1, i2) = at(static_cast<std::ptrdiff_t>(i1), static_cast<std::ptrdiff_t>(i2));
    return out;
}

GhostExtended apply_bc(const ScalarField& f, Axis axis, int k) {
    require_stencil(f, axis, k);
    const std::size_t w = static_cast<std::size_t>(k);
    const std::size_t n1 = axis == Axis::X1 ? f.n1() + 2 * w : f.n1();
    const std::size_t n2 = axis == Axis::X2 ? f.n2() + 2 * w : f.n2();
    GhostExtended ext{ScalarField(n1, n2, f.dx1(), f.dx2()), axis, k};
    const auto n = static_cast<std::ptrdiff_t>(f.extent(axis));
    const auto sw = static_cast<std::ptrdiff_t>(w);
    for (std::size_t p2 = 0; p2 < n2; ++p2) {
        for (std::size_t p1 = 0; p1 < n1; ++p1) {
            auto i1 = static_cast<std::ptrdiff_t>(p1);
            auto i2 = static_cast<std::ptrdiff_t>(p2);
            if (axis == Axis::X1) i1 = reflect_index(i1 - sw, n);
            else i2 = reflect_index(i2 - sw, n);
            ext.padded(p1, p2) = f(static_cast<std::size_t>(i1), static_cast<std::size_t>(i2));
        }
    }
    return ext;
}

GhostExtended apply_bc(const GhostExtended& ext) { return apply_bc(ext.interior(), ext.axis, ext.width); }

// ---------------------------------------------------------------------------
// Differences

ScalarField diff(const ScalarField& f, Axis axis, int order) {
    require_stencil(f, axis, order);
    ScalarField out(f.n1(), f.n2(), f.dx1(), f.dx2());
    const auto lay = line_layout(f, axis);
    const double h = f.spacing(axis);
    const auto n = static_cast<std::ptrdiff_t>(lay.length);
    const double* src = f.values().data();
    double* dst = out.values().data();
    for (std::size_t line = 0; line < lay.count; ++line) {
        const std::size_t b = lay.base(line, f.n1());
        auto v = [&](std::ptrdiff_t j) { return src[b + static_cast<std::size_t>(reflect_index(j, n)) * lay.stride]; };
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            const double d = order == 1 ? (v(j + 1) - v(j - 1)) / (2.0 * h)
                                        : (v(j + 1) - 2.0 * v(j) + v(j - 1)) / (h * h);
            dst[b + static_cast<std::size_t>(j) * lay.stride] = d;
        }
    }
    return out;
}

ScalarField variation(const ScalarField& u, Axis axis, int k) {
    require_stencil(u, axis, k);
    if (k == 2) return diff(u, axis, 2);
    ScalarField out(u.n1(), u.n2(), u.dx1(), u.dx2());
    const auto lay = line_layout(u, axis);
    const double h = u.spacing(axis);
    const double* src = u.values().data();
    double* dst = out.values().data();
    for (std::size_t line = 0; line < lay.count; ++line) {
        const std::size_t b = lay.base(line, u.n1());
        for (std::size_t j = 0; j + 1 < lay.length; ++j)
            dst[b + j * lay.stride] = (src[b + (j + 1) * lay.stride] - src[b + j * lay.stride]) / h;
        dst[b + (lay.length - 1) * lay.stride] = 0.0;
    }
    return out;
}

ScalarField variation_adjoint(const ScalarField& g, Axis axis, int k) {
    require_stencil(g, axis, k);
    if (k == 2) return diff(g, axis, 2);
    ScalarField out(g.n1(), g.n2(), g.dx1(), g.dx2());
    const auto lay = line_layout(g, axis);
    const double h = g.spacing(axis);
    const double* src = g.values().data();
    double* dst = out.values().data();
    for (std::size_t line = 0; line < lay.count; ++line) {
        const std::size_t b = lay.base(line, g.n1());
        for (std::size_t j = 0; j < lay.length; ++j) {
            const double left = j > 0 ? src[b + (j - 1) * lay.stride] : 0.0;
            const double right = j + 1 < lay.length ? src[b + j * lay.stride] : 0.0;
            dst[b + j * lay.stride] = (left - right) / h;
        }
    }
    return out;
}

ScalarField variation_gram_diagonal(const ScalarField& c, Axis axis, int k) {
    require_stencil(c, axis, k);
    ScalarField out(c.n1(), c.n2(), c.dx1(), c.dx2());
    const auto lay = line_layout(c, axis);
    const double h = c.spacing(axis);
    const double scale = k == 1 ? 1.0 / (h * h) : 1.0 / (h * h * h * h);
    const std::size_t n = lay.length;
    const double* w = c.values().data();
    double* dst = out.values().data();
    for (std::size_t line = 0; line < lay.count; ++line) {
        const std::size_t b = lay.base(line, c.n1());
        auto at = [&](std::size_t j) { return w[b + j * lay.stride]; };
        for (std::size_t j = 0; j < n; ++j) {
            double d = 0.0;
            if (k == 1) {
                // column j of the face difference touches faces j-1 and j
                if (j > 0) d += at(j - 1);
                if (j + 1 < n) d += at(j);
            } else {
                // column j of the Neumann Laplacian: rows j-1, j, j+1
                const double centre = -2.0 + (j == 0 ? 1.0 : 0.0) + (j + 1 == n ? 1.0 : 0.0);
                if (j > 0) d += at(j - 1);
                d += centre * centre * at(j);
                if (j + 1 < n) d += at(j + 1);
            }
            dst[b + j * lay.stride] = d * scale;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Norms

double norm_l2(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values()) s += v * v;
    return std::sqrt(s * f.cell_area());
}

double norm_linf(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace dispflow
