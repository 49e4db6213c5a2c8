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

#include "dispflow/tomo.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <numeric>

#include "dispflow/error.hpp"
#include "dispflow/random.hpp"

namespace dispflow {

namespace {

constexpr double kPi = std::numbers::pi;

double deg(double d) { return d * kPi / 180.0; }

void require_square(const ScalarField& f) {
    if (f.n1() != f.n2() || f.n1() < 2)
        throw DimensionError("tomography needs a square image with n >= 2");
    if (std::abs(f.dx1() - f.dx2()) > 1e-12 * f.dx1())
        throw DimensionError("tomography needs equal spacing along both axes");
}

void require_angles(std::span<const double> angles) {
    if (angles.size() < 2) throw InvalidArgument("at least two projection angles are required");
    for (std::size_t j = 0; j < angles.size(); ++j) {
        if (!std::isfinite(angles[j]) || angles[j] < 0.0 || angles[j] >= kPi)
            throw InvalidArgument("projection angles must lie in [0, pi)");
        if (j > 0 && angles[j] <= angles[j - 1])
            throw InvalidArgument("projection angles must be strictly increasing");
    }
}

double bilinear(const ScalarField& f, double px, double py) {
    const auto n1 = static_cast<long>(f.n1());
    const auto n2 = static_cast<long>(f.n2());
    const double fx = std::floor(px), fy = std::floor(py);
    const long i0 = static_cast<long>(fx), j0 = static_cast<long>(fy);
    if (i0 < -1 || j0 < -1 || i0 >= n1 || j0 >= n2) return 0.0;
    const double tx = px - fx, ty = py - fy;
    double acc = 0.0;
    for (int dj = 0; dj < 2; ++dj) {
        const long j = j0 + dj;
        if (j < 0 || j >= n2) continue;
        const double wy = dj ? ty : 1.0 - ty;
        for (int di = 0; di < 2; ++di) {
            const long i = i0 + di;
            if (i < 0 || i >= n1) continue;
            acc += wy * (di ? tx : 1.0 - tx) * f(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    }
    return acc;
}

// Line integrals at the traced angles; any real angle is accepted.
ScalarField project(const ScalarField& f, std::span<const double> traced, std::size_t n_off, double dl) {
    const double h = f.dx1();
    const double fov = h * static_cast<double>(f.n1());
    const double c = 0.5 * fov;
    const double half = 0.5 * std::sqrt(2.0) * fov + h;
    const auto ns = static_cast<std::size_t>(std::ceil(2.0 * half / (0.5 * h)));
    const double ds = 2.0 * half / static_cast<double>(ns);

    ScalarField out(traced.size(), n_off, kPi / static_cast<double>(traced.size()), dl);
    const double mid = 0.5 * static_cast<double>(n_off - 1);
    for (std::size_t j = 0; j < traced.size(); ++j) {
        const double ct = std::cos(traced[j]), st = std::sin(traced[j]);
        for (std::size_t l = 0; l < n_off; ++l) {
            const double off = (static_cast<double>(l) - mid) * dl;
            const double x0 = c + off * ct, y0 = c + off * st;
            double acc = 0.0;
            for (std::size_t m = 0; m < ns; ++m) {
                const double s = -half + (static_cast<double>(m) + 0.5) * ds;
                const double x = x0 - s * st, y = y0 + s * ct;
                acc += bilinear(f, x / h - 0.5, y / h - 0.5);
            }
            out(j, l) = acc * ds;
        }
    }
    return out;
}

struct FftwPlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

// Frequency response of the band-limited ramp on n samples of spacing dl.
std::vector<double> ramp_response(std::size_t n, double dl, FbpFilter filter) {
    const std::size_t nh = n / 2 + 1;
    std::vector<double> resp(nh, 1.0);
    if (filter == FbpFilter::None) return resp;

    std::vector<double> h(n, 0.0);
    h[0] = 1.0 / (4.0 * dl * dl);
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t k = std::min(i, n - i);
        if (k % 2 == 1) h[i] = -1.0 / (kPi * kPi * static_cast<double>(k * k) * dl * dl);
    }
    std::vector<std::complex<double>> spec(nh);
    Plan plan(fftw_plan_dft_r2c_1d(static_cast<int>(n), h.data(),
                                   reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE));
    fftw_execute(plan.get());
    for (std::size_t k = 0; k < nh; ++k) {
        resp[k] = dl * spec[k].real();
        if (filter == FbpFilter::SheppLogan && k > 0) {
            const double w = kPi * static_cast<double>(k) / static_cast<double>(n);
            resp[k] *= std::sin(w) / w;
        }
    }
    return resp;
}

}  // namespace

void Sinogram::validate() const {
    if (angles.size() != data.n1()) throw DimensionError("sinogram angle count does not match data");
    if (data.n2() < 2) throw DimensionError("sinogram needs at least two offsets");
    if (!(offset_spacing > 0.0) || !(fov > 0.0)) throw InvalidArgument("sinogram spacing must be positive");
    require_angles(angles);
}

Phantom shepp_logan_ellipses(SheppLoganVariant variant) {
    struct Row {
        double hi, std, a, b, x, y, phi;
    };
    static constexpr Row rows[] = {
        {1.0, 2.0, 0.69, 0.92, 0.0, 0.0, 0.0},
        {-0.8, -0.98, 0.6624, 0.874, 0.0, -0.0184, 0.0},
        {-0.2, -0.02, 0.11, 0.31, 0.22, 0.0, -18.0},
        {-0.2, -0.02, 0.16, 0.41, -0.22, 0.0, 18.0},
        {0.1, 0.01, 0.21, 0.25, 0.0, 0.35, 0.0},
        {0.1, 0.01, 0.046, 0.046, 0.0, 0.1, 0.0},
        {0.1, 0.02, 0.046, 0.046, 0.0, -0.1, 0.0},
        {0.1, 0.01, 0.046, 0.023, -0.08, -0.605, 0.0},
        {0.1, 0.01, 0.023, 0.023, 0.0, -0.606, 0.0},
        {0.1, 0.01, 0.023, 0.046, 0.06, -0.605, 0.0},
    };
    Phantom p;
    for (const Row& r : rows) {
        const double inten = variant == SheppLoganVariant::HighContrast ? r.hi : r.std;
        p.ellipses.push_back({r.x, r.y, r.a, r.b, deg(r.phi), inten});
    }
    return p;
}

ScalarField rasterize(const Phantom& phantom, std::size_t n, int supersample) {
    if (n < 2) throw InvalidArgument("phantom size must be at least 2");
    if (supersample < 1) throw InvalidArgument("supersample must be positive");
    struct Prepared {
        double cx, cy, ia2, ib2, c, s, v;
    };
    std::vector<Prepared> prep;
    for (const Ellipse& e : phantom.ellipses) {
        if (!(e.a > 0.0) || !(e.b > 0.0)) throw InvalidArgument("ellipse semi-axes must be positive");
        prep.push_back({e.cx, e.cy, 1.0 / (e.a * e.a), 1.0 / (e.b * e.b), std::cos(e.rotation),
                        std::sin(e.rotation), e.intensity});
    }
    ScalarField out(n, n);
    const auto s = static_cast<std::size_t>(supersample);
    const double nd = static_cast<double>(n);
    const double w = 1.0 / static_cast<double>(s * s);
    for (std::size_t i2 = 0; i2 < n; ++i2) {
        for (std::size_t i1 = 0; i1 < n; ++i1) {
            double acc = 0.0;
            for (std::size_t b = 0; b < s; ++b) {
                const double y = 2.0 * (static_cast<double>(i2) + (static_cast<double>(b) + 0.5) / static_cast<double>(s)) / nd - 1.0;
                for (std::size_t a = 0; a < s; ++a) {
                    const double x = 2.0 * (static_cast<double>(i1) + (static_cast<double>(a) + 0.5) / static_cast<double>(s)) / nd - 1.0;
                    for (const Prepared& e : prep) {
                        const double dx = x - e.cx, dy = y - e.cy;
                        const double u = dx * e.c + dy * e.s;
                        const double v = -dx * e.s + dy * e.c;
                        if (u * u * e.ia2 + v * v * e.ib2 <= 1.0) acc += e.v;
                    }
                }
            }
            out(i1, i2) = acc * w;
        }
    }
    return out;
}

ScalarField shepp_logan(std::size_t n, SheppLoganVariant variant) {
    if (n < 16) throw InvalidArgument("phantom size must be at least 16");
    const auto s = static_cast<int>((512 + n - 1) / n);
    return rasterize(shepp_logan_ellipses(variant), n, s);
}

std::vector<double> uniform_angles(std::size_t count) {
    if (count < 2) throw InvalidArgument("at least two projection angles are required");
    std::vector<double> th(count);
    for (std::size_t j = 0; j < count; ++j) th[j] = kPi * static_cast<double>(j) / static_cast<double>(count);
    return th;
}

std::size_t default_offset_count(std::size_t n) {
    return 2 * static_cast<std::size_t>(std::ceil(static_cast<double>(n) * std::sqrt(2.0) / 2.0)) + 1;
}

Sinogram radon(const ScalarField& f, std::span<const double> angles, std::size_t n_offsets) {
    AngularPerturbation none;
    none.d.assign(angles.size(), 0.0);
    return radon_perturbed(f, angles, n_offsets, none, 0.0);
}

AngularPerturbation sample_uniform_displacement(std::span<const double> angles, double a, std::uint64_t seed) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("displacement bound must be finite and >= 0");
    AngularPerturbation p;
    p.bound = a;
    p.seed = seed;
    Rng rng(seed);
    p.d.resize(angles.size());
    for (double& d : p.d) d = a * rng.uniform();
    return p;
}

Sinogram radon_perturbed(const ScalarField& f, std::span<const double> angles, std::size_t n_offsets,
                         const AngularPerturbation& pert, double noise_sigma, std::uint64_t noise_seed) {
    require_square(f);
    require_angles(angles);
    if (pert.d.size() != angles.size()) throw DimensionError("displacement count does not match angle count");
    if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise level must be >= 0");
    if (n_offsets == 0) n_offsets = default_offset_count(f.n1());
    if (n_offsets < 2) throw InvalidArgument("at least two offsets are required");

    std::vector<double> traced(angles.begin(), angles.end());
    for (std::size_t j = 0; j < traced.size(); ++j) traced[j] += pert.d[j];

    Sinogram s;
    s.offset_spacing = f.dx1();
    s.fov = f.dx1() * static_cast<double>(f.n1());
    s.data = project(f, traced, n_offsets, s.offset_spacing);
    s.angles.assign(angles.begin(), angles.end());
    if (noise_sigma > 0.0) {
        Rng rng(noise_seed);
        for (double& v : s.data.values()) v += noise_sigma * rng.normal();
    }
    return s;
}

ScalarField fbp(const Sinogram& s, std::size_t n_out, FbpFilter filter) {
    s.validate();
    if (n_out < 16) throw InvalidArgument("reconstruction size must be at least 16");
    const std::size_t na = s.angle_count(), nl = s.offset_count();
    const double dl = s.offset_spacing;

    std::size_t pad = 1;
    while (pad < 2 * nl) pad <<= 1;
    const std::vector<double> resp = ramp_response(pad, dl, filter);

    std::vector<double> line(pad);
    std::vector<std::complex<double>> spec(pad / 2 + 1);
    Plan fwd(fftw_plan_dft_r2c_1d(static_cast<int>(pad), line.data(),
                                  reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE));
    Plan inv(fftw_plan_dft_c2r_1d(static_cast<int>(pad), reinterpret_cast<fftw_complex*>(spec.data()),
                                  line.data(), FFTW_ESTIMATE));

    ScalarField q(na, nl, s.data.dx1(), dl);
    for (std::size_t j = 0; j < na; ++j) {
        std::fill(line.begin(), line.end(), 0.0);
        for (std::size_t l = 0; l < nl; ++l) line[l] = s.data(j, l);
        fftw_execute(fwd.get());
        for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= resp[k];
        fftw_execute(inv.get());
        for (std::size_t l = 0; l < nl; ++l) q(j, l) = line[l] / static_cast<double>(pad);
    }

    std::vector<double> weight(na);
    for (std::size_t j = 0; j < na; ++j) {
        const double prev = j == 0 ? s.angles[na - 1] - kPi : s.angles[j - 1];
        const double next = j + 1 == na ? s.angles[0] + kPi : s.angles[j + 1];
        weight[j] = 0.5 * (next - prev);
    }

    const double h = s.fov / static_cast<double>(n_out);
    ScalarField out(n_out, n_out, h, h);
    const double mid = 0.5 * static_cast<double>(nl - 1);
    for (std::size_t j = 0; j < na; ++j) {
        const double ct = std::cos(s.angles[j]), st = std::sin(s.angles[j]);
        for (std::size_t i2 = 0; i2 < n_out; ++i2) {
            const double y = (static_cast<double>(i2) + 0.5) * h - 0.5 * s.fov;
            for (std::size_t i1 = 0; i1 < n_out; ++i1) {
                const double x = (static_cast<double>(i1) + 0.5) * h - 0.5 * s.fov;
                const double t = (x * ct + y * st) / dl + mid;
                const double ft = std::floor(t);
                const long l0 = static_cast<long>(ft);
                const double w = t - ft;
                double v = 0.0;
                if (l0 >= 0 && l0 < static_cast<long>(nl)) v += (1.0 - w) * q(j, static_cast<std::size_t>(l0));
                if (l0 + 1 >= 0 && l0 + 1 < static_cast<long>(nl)) v += w * q(j, static_cast<std::size_t>(l0 + 1));
                out(i1, i2) += weight[j] * v;
            }
        }
    }
    return out;
}

Sinogram canonicalize(Sinogram s) {
    const std::size_t na = s.angle_count(), nl = s.offset_count();
    if (s.angles.size() != na) throw DimensionError("sinogram angle count does not match data");
    std::vector<double> th(na);
    std::vector<bool> flip(na, false);
    for (std::size_t j = 0; j < na; ++j) {
        if (!std::isfinite(s.angles[j])) throw InvalidArgument("non-finite projection angle");
        double a = std::fmod(s.angles[j], 2.0 * kPi);
        if (a < 0.0) a += 2.0 * kPi;
        if (a >= kPi) {
            a -= kPi;
            flip[j] = true;
        }
        th[j] = a;
    }
    std::vector<std::size_t> order(na);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return th[a] < th[b]; });

    ScalarField data(na, nl, s.data.dx1(), s.data.dx2());
    std::vector<double> angles(na);
    for (std::size_t r = 0; r < na; ++r) {
        const std::size_t j = order[r];
        angles[r] = th[j];
        for (std::size_t l = 0; l < nl; ++l) data(r, l) = s.data(j, flip[j] ? nl - 1 - l : l);
    }
    s.data = std::move(data);
    s.angles = std::move(angles);
    return s;
}

}  // namespace dispflow
