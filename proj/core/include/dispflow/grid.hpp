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

namespace dispflow {

/// Grid axis. X1 is the first coordinate (beam direction in a sinogram),
/// X2 the second (beam offset).
enum class Axis { X1, X2 };

constexpr Axis other(Axis a) noexcept { return a == Axis::X1 ? Axis::X2 : Axis::X1; }

/// Real-valued samples on a uniform cell-centred grid.
///
/// Sample (i1, i2) sits at x = ((i1 + 1/2) dx1, (i2 + 1/2) dx2). Storage is
/// row-major with rows indexed by i2, so a row is an x2-slice running along x1.
/// The default spacing maps the grid onto the unit square.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(std::size_t n1, std::size_t n2);
    ScalarField(std::size_t n1, std::size_t n2, double dx1, double dx2);
    ScalarField(std::size_t n1, std::size_t n2, double dx1, double dx2, std::vector<double> values);

    std::size_t n1() const noexcept { return n1_; }
    std::size_t n2() const noexcept { return n2_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::size_t extent(Axis a) const noexcept { return a == Axis::X1 ? n1_ : n2_; }

    double dx1() const noexcept { return dx1_; }
    double dx2() const noexcept { return dx2_; }
    double spacing(Axis a) const noexcept { return a == Axis::X1 ? dx1_ : dx2_; }
    double cell_area() const noexcept { return dx1_ * dx2_; }

    /// Cell-centre coordinates.
    double x1(std::size_t i1) const noexcept { return (static_cast<double>(i1) + 0.5) * dx1_; }
    double x2(std::size_t i2) const noexcept { return (static_cast<double>(i2) + 0.5) * dx2_; }

    double& operator()(std::size_t i1, std::size_t i2) noexcept { return values_[i2 * n1_ + i1]; }
    double operator()(std::size_t i1, std::size_t i2) const noexcept { return values_[i2 * n1_ + i1]; }

    std::span<double> row(std::size_t i2) noexcept { return {values_.data() + i2 * n1_, n1_}; }
    std::span<const double> row(std::size_t i2) const noexcept { return {values_.data() + i2 * n1_, n1_}; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool same_shape(const ScalarField& other) const noexcept {
        return n1_ == other.n1_ && n2_ == other.n2_;
    }

    /// True when every sample is finite.
    bool all_finite() const noexcept;

    double min() const;
    double max() const;
    /// max - min, or 0 for an empty field.
    double dynamic_range() const;

    ScalarField& operator+=(const ScalarField& rhs);
    ScalarField& operator-=(const ScalarField& rhs);
    ScalarField& operator*=(double s) noexcept;

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    std::size_t n1_ = 0;
    std::size_t n2_ = 0;
    double dx1_ = 1.0;
    double dx2_ = 1.0;
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Builds a field by sampling fn(x1, x2) at cell centres.
template <class Fn>
ScalarField sample(std::size_t n1, std::size_t n2, double dx1, double dx2, Fn&& fn) {
    ScalarField f(n1, n2, dx1, dx2);
    for (std::size_t i2 = 0; i2 < n2; ++i2)
        for (std::size_t i1 = 0; i1 < n1; ++i1) f(i1, i2) = fn(f.x1(i1), f.x2(i2));
    return f;
}

/// Index of the even (half-sample symmetric) reflection of j into [0, n).
/// Valid for -n <= j < 2n.
constexpr std::ptrdiff_t reflect_index(std::ptrdiff_t j, std::ptrdiff_t n) noexcept {
    if (j < 0) return -j - 1;
    if (j >= n) return 2 * n - j - 1;
    return j;
}

/// Field padded with `width` ghost cells on both faces normal to `axis`.
///
/// Ghost values are the even reflection of the interior, so every odd
/// one-sided difference up to order 2*width-1 vanishes on those faces.
struct GhostExtended {
    ScalarField padded;
    Axis axis = Axis::X1;
    int width = 0;

    /// Value at interior-relative indices; along `axis` the range is
    /// [-width, n + width).
    double at(std::ptrdiff_t i1, std::ptrdiff_t i2) const;
    ScalarField interior() const;
};

GhostExtended apply_bc(const ScalarField& f, Axis axis, int k);
/// Refills the ghost cells of an already extended field from its interior.
GhostExtended apply_bc(const GhostExtended& ext);

/// Central second-order difference of order k (1 or 2) along `axis`.
/// Boundary samples use the even ghost extension.
ScalarField diff(const ScalarField& f, Axis axis, int order);

/// Difference operator whose Gram matrix defines the regularizer.
///
/// k = 1: one-sided difference (u[j+1] - u[j]) / dx stored at index j, i.e.
/// on the face between j and j+1; the outermost face carries 0.
/// k = 2: compact second difference with even reflection (the Neumann
/// Laplacian), which is symmetric.
ScalarField variation(const ScalarField& u, Axis axis, int k);

/// Adjoint of `variation` with respect to the plain Euclidean product.
ScalarField variation_adjoint(const ScalarField& g, Axis axis, int k);

/// Diagonal of variation_adjoint(c * variation(.)) for per-entry weights c.
ScalarField variation_gram_diagonal(const ScalarField& weights, Axis axis, int k);

/// sqrt(sum dx1 dx2 f^2)
double norm_l2(const ScalarField& f);
double norm_linf(const ScalarField& f);

/// Throws DimensionError unless the field admits order-k stencils along axis.
void require_stencil(const ScalarField& f, Axis axis, int k);

}  // namespace dispflow
