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

#include <Eigen/Dense>

#include <cmath>

#include "doctest.h"
#include "dispflow/error.hpp"
#include "dispflow/experiment.hpp"
#include "dispflow/random.hpp"
#include "dispflow/varsolve.hpp"

using namespace dispflow;

namespace {

EnergyParams energy(Axis axis, int k, int p, int q) {
    EnergyParams e;
    e.axis = axis;
    e.k = k;
    e.p = p;
    e.q = q;
    return e;
}

ScalarField noisy_smooth(std::size_t n, std::uint64_t seed, double sigma) {
    ScalarField f = make_smooth_image(n, n, seed);
    Rng rng(seed + 1);
    for (double& v : f.values()) v += sigma * rng.normal();
    return f;
}

ScalarField linear_x1(std::size_t n) {
    const double h = 1.0 / static_cast<double>(n);
    return sample(n, n, h, h, [](double x1, double) { return x1; });
}

}  // namespace

TEST_CASE("energy parameter validation") {
    EnergyParams e;
    CHECK_NOTHROW(e.validate());
    e.alpha = 0.0;
    CHECK_THROWS_AS(e.validate(), InvalidArgument);
    e = {};
    e.eps = 0.0;
    CHECK_THROWS_AS(e.validate(), InvalidArgument);
    e = {};
    e.q = 3;
    CHECK_THROWS_AS(e.validate(), InvalidArgument);
}

TEST_CASE("regularizer of constant fields vanishes") {
    ScalarField c(9, 9);
    for (double& v : c.values()) v = 2.5;
    for (Axis a : {Axis::X1, Axis::X2})
        for (int k : {1, 2})
            for (int p : {1, 2}) CHECK(energy_R(c, a, k, p) == 0.0);
}

TEST_CASE("regularizer of x1 approaches its integral") {
    // the outermost face carries no difference, an O(dx) boundary layer
    for (std::size_t n : {32u, 64u}) {
        const double h = 1.0 / static_cast<double>(n);
        const ScalarField u = linear_x1(n);
        CHECK(std::abs(energy_R(u, Axis::X1, 1, 2) - 0.5) <= h);
        CHECK(std::abs(energy_R(u, Axis::X1, 1, 1) - 1.0) <= h);
        CHECK(energy_R(u, Axis::X2, 1, 2) == 0.0);
    }
}

TEST_CASE("data terms") {
    const std::size_t n = 64;
    const double h = 1.0 / n;
    const ScalarField u = linear_x1(n);
    CHECK(energy_D2(u, u, 1e-3) == 0.0);
    CHECK(energy_D1(u, u, 1e-3) == 0.0);

    ScalarField ref = u;
    const double delta = 0.3, eps = 0.05;
    for (double& v : ref.values()) v -= delta;
    // the two reflected boundary columns see d1 u = 1/2, an O(dx) layer
    const double layer = h * delta * delta * (1.0 / (0.25 + eps) - 1.0 / (1.0 + eps));
    CHECK(energy_D2(u, ref, eps) == doctest::Approx(0.5 * delta * delta / (1.0 + eps) + layer).epsilon(1e-9));
    const double layer1 = h * delta * delta * (1.0 / (0.5 + eps) - 1.0 / (1.0 + eps));
    CHECK(energy_D1(u, ref, eps) == doctest::Approx(0.5 * delta * delta / (1.0 + eps) + layer1).epsilon(1e-9));

    // flat u: D2 = 1/2 ||u - u_ref||^2 / eps, so halving eps doubles it
    ScalarField flat(n, n), noise = noisy_smooth(n, 3, 0.1);
    const double a = energy_D2(flat, noise, 1e-2), b = energy_D2(flat, noise, 5e-3);
    CHECK(a == doctest::Approx(0.5 * norm_l2(noise) * norm_l2(noise) / 1e-2));
    CHECK(b / a == doctest::Approx(2.0));

    CHECK_THROWS_AS(energy_D2(u, ScalarField(n, n + 1), eps), DimensionError);
}

TEST_CASE("D1 is the geometric mean of D2 and least squares when |d1 u| is constant") {
    const std::size_t n = 32;
    const ScalarField u = linear_x1(n);
    const ScalarField ref = noisy_smooth(n, 5, 0.2);
    const ScalarField d1 = data_density(u, ref, 0.0, 1);
    const ScalarField d2 = data_density(u, ref, 0.0, 2);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = u.values()[i] - ref.values()[i];
        const double ls = 0.5 * r * r;
        CHECK(d1.values()[i] == doctest::Approx(std::sqrt(d2.values()[i] * ls)).epsilon(1e-12));
    }
}

TEST_CASE("convex_step keeps fields with R = 0") {
    // constant along the regularized axis
    const std::size_t n = 16;
    const ScalarField u = sample(n, n, 1.0 / n, 1.0 / n, [](double, double x2) { return std::sin(5.0 * x2); });
    for (int k : {1, 2})
        for (int p : {1, 2})
            for (int q : {1, 2}) {
                const ScalarField out = convex_step(u, energy(Axis::X1, k, p, q));
                CHECK(norm_linf(out - u) <= 1e-9);
            }
}

TEST_CASE("convex_step approaches u_prev as alpha vanishes") {
    const ScalarField u = noisy_smooth(16, 7, 0.05);
    EnergyParams e = energy(Axis::X1, 1, 2, 2);
    e.alpha = 1e-12;
    CHECK(norm_l2(convex_step(u, e) - u) <= 1e-6);
}

TEST_CASE("three-point toy problem matches a dense solve") {
    ScalarField u(3, 3, 0.5, 0.5, {0.0, 1.0, 0.2, 0.4, -0.3, 0.9, 1.0, 1.0, 0.0});
    for (int k : {1}) {
        EnergyParams e = energy(Axis::X1, k, 2, 2);
        e.alpha = 0.7;
        e.eps = 0.1;
        const ScalarField out = convex_step(u, e);
        const ScalarField w = lag_weights(u, 2, e.eps);
        for (std::size_t r = 0; r < 3; ++r) {
            // D on one row: faces (u1-u0)/h, (u2-u1)/h, 0
            Eigen::Matrix3d D = Eigen::Matrix3d::Zero();
            D(0, 0) = -2.0;
            D(0, 1) = 2.0;
            D(1, 1) = -2.0;
            D(1, 2) = 2.0;
            Eigen::Matrix3d A = e.alpha * D.transpose() * D;
            Eigen::Vector3d b;
            for (int j = 0; j < 3; ++j) {
                A(j, j) += 1.0 / w(static_cast<std::size_t>(j), r);
                b(j) = u(static_cast<std::size_t>(j), r) / w(static_cast<std::size_t>(j), r);
            }
            const Eigen::Vector3d x = A.ldlt().solve(b);
            for (int j = 0; j < 3; ++j) CHECK(out(static_cast<std::size_t>(j), r) == doctest::Approx(x(j)).epsilon(1e-7));
        }
    }
}

TEST_CASE("convex_step output is a minimizer of Fc") {
    const ScalarField u_prev = noisy_smooth(12, 11, 0.05);
    Rng rng(99);
    for (int k : {1, 2}) {
        for (int p : {1, 2}) {
            EnergyParams e = energy(Axis::X1, k, p, 2);
            e.alpha = 1e-3;
            e.beta = 1e-2;
            e.cg_tol = 1e-12;
            e.fixed_point_tol = 1e-12;
            e.fixed_point_max_iter = 5000;
            const ScalarField u = convex_step(u_prev, e);
            const double f0 = convex_energy(u, u_prev, e);
            int decreased = 0;
            for (int trial = 0; trial < 100; ++trial) {
                ScalarField dir(u.n1(), u.n2(), u.dx1(), u.dx2());
                for (double& v : dir.values()) v = rng.normal();
                dir *= 1e-3 / norm_l2(dir);
                if (convex_energy(u + dir, u_prev, e) < f0 * (1.0 - 1e-12)) ++decreased;
            }
            CHECK(decreased == 0);
        }
    }
}

TEST_CASE("semi-implicit relation holds at the convex step") {
    const ScalarField u_prev = noisy_smooth(16, 13, 0.02);
    for (int q : {1, 2}) {
        EnergyParams e = energy(Axis::X2, 2, 2, q);
        e.alpha = 1e-4;
        e.cg_tol = 1e-13;
        const ScalarField u = convex_step(u_prev, e);
        CHECK(semi_implicit_residual(u, u_prev, e) <= 1e-6);
    }
}

TEST_CASE("solver failures surface iterations and residual") {
    const ScalarField u_prev = noisy_smooth(16, 17, 0.1);
    EnergyParams e = energy(Axis::X1, 1, 2, 2);
    e.cg_max_iter = 1;
    try {
        convex_step(u_prev, e);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& err) {
        CHECK(err.iterations() >= 1);
        CHECK(err.residual() > e.cg_tol);
    }
}

TEST_CASE("iterate stops at once on a fixed point") {
    ScalarField c(8, 8);
    for (double& v : c.values()) v = 0.25;
    const IterateResult r = iterate(c, EnergyParams{}, 20);
    REQUIRE(r.trace.records.size() == 1);
    CHECK(r.trace.records[0].m == 1);
    CHECK(r.trace.records[0].fc == 0.0);
    CHECK(r.trace.records[0].r == 0.0);
    CHECK(r.trace.records[0].du_l2 == 0.0);
    CHECK(r.trace.monotone());
    CHECK_THROWS_AS(iterate(c, EnergyParams{}, 0), InvalidArgument);
}

TEST_CASE("lagged iteration is monotone for every parameter choice") {
    const ScalarField u0 = noisy_smooth(16, 21, 0.05);
    for (Axis a : {Axis::X1, Axis::X2}) {
        for (int k : {1, 2}) {
            for (int p : {1, 2}) {
                for (int q : {1, 2}) {
                    EnergyParams e = energy(a, k, p, q);
                    e.alpha = 1e-3;
                    e.beta = 5e-2;
                    const IterateResult r = iterate(u0, e, 10, 0.0);
                    CHECK(r.trace.records.size() == 10);
                    for (const auto& v : r.trace.violations)
                        MESSAGE("axis " << int(a) << " k" << k << " p" << p << " q" << q << " m" << v.m << " " << v.check
                                        << " excess " << v.excess);
                    CHECK(r.trace.monotone());
                    // Fc(u_m; u_m) = alpha R(u_m)
                    const ScalarField& u = r.u;
                    CHECK(convex_energy(u, u, e) == doctest::Approx(e.alpha * energy_R(u, a, k, p, e.beta)).epsilon(1e-12));
                }
            }
        }
    }
}
