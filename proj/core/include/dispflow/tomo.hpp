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
#include <cstdint>
#include <span>
#include <vector>

#include "dispflow/grid.hpp"

namespace dispflow {

/// Parallel-beam sinogram. data(j, l) holds the line integral for angle
/// index j (axis X1) and offset index l (axis X2).
struct Sinogram {
    ScalarField data;
    std::vector<double> angles;   ///< radians, one per X1 sample
    double offset_spacing = 1.0;  ///< spacing of the signed offsets
    double fov = 1.0;             ///< side length of the square image domain

    std::size_t angle_count() const noexcept { return data.n1(); }
    std::size_t offset_count() const noexcept { return data.n2(); }
    /// Signed offset of sample l, zero at the centre sample.
    double offset(std::size_t l) const noexcept {
        return (static_cast<double>(l) - 0.5 * static_cast<double>(offset_count() - 1)) * offset_spacing;
    }

    /// Throws unless angles are strictly increasing in [0, pi) and match n1.
    void validate() const;
};

struct Ellipse {
    double cx = 0.0, cy = 0.0;  ///< centre in [-1, 1]^2 phantom coordinates
    double a = 1.0, b = 1.0;    ///< semi-axes
    double rotation = 0.0;      ///< radians, counter-clockwise
    double intensity = 1.0;     ///< additive
};

struct Phantom {
    std::vector<Ellipse> ellipses;
};

enum class SheppLoganVariant { Standard, HighContrast };

/// The ten-ellipse Shepp-Logan table. HighContrast is the usual "modified"
/// variant (values in [0, 1]).
Phantom shepp_logan_ellipses(SheppLoganVariant variant = SheppLoganVariant::HighContrast);

/// Area-weighted rasterization on an n x n grid covering [-1, 1]^2 with
/// unit-square spacing 1/n, using supersample^2 point samples per pixel.
ScalarField rasterize(const Phantom& phantom, std::size_t n, int supersample = 1);

/// Shepp-Logan phantom. Pixels are averaged over a sub-sample lattice of at
/// least 512 points per axis so that different resolutions agree.
ScalarField shepp_logan(std::size_t n, SheppLoganVariant variant = SheppLoganVariant::HighContrast);

/// count angles j*pi/count.
std::vector<double> uniform_angles(std::size_t count);

/// Odd offset count covering the image diagonal at pixel spacing.
std::size_t default_offset_count(std::size_t n);

/// Line integrals by ray sampling (step <= half a pixel) with bilinear
/// interpolation; zero outside the image. n_offsets = 0 selects the default.
Sinogram radon(const ScalarField& f, std::span<const double> angles, std::size_t n_offsets = 0);

struct AngularPerturbation {
    std::vector<double> d;  ///< per-angle displacement, radians
    double bound = 0.0;
    std::uint64_t seed = 0;
};

/// i.i.d. Uniform[0, a] displacements.
AngularPerturbation sample_uniform_displacement(std::span<const double> angles, double a, std::uint64_t seed);

/// Rays traced at angles[j] + d[j] but labelled angles[j], plus i.i.d.
/// Gaussian noise of standard deviation noise_sigma.
Sinogram radon_perturbed(const ScalarField& f, std::span<const double> angles, std::size_t n_offsets,
                         const AngularPerturbation& pert, double noise_sigma, std::uint64_t noise_seed = 0);

enum class FbpFilter { RamLak, SheppLogan, None };

/// Ramp-filtered backprojection onto an n_out x n_out grid over the
/// sinogram's field of view. Each angle is weighted by its share of [0, pi).
ScalarField fbp(const Sinogram& s, std::size_t n_out, FbpFilter filter = FbpFilter::RamLak);

/// Maps every angle into [0, pi) using R(theta + pi, l) = R(theta, -l) and
/// sorts the projections by angle.
Sinogram canonicalize(Sinogram s);

}  // namespace dispflow
