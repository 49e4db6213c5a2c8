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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "dispflow/error.hpp"
#include "dispflow/experiment.hpp"
#include "dispflow/metrics.hpp"

using namespace dispflow;

TEST_CASE("identical fields: zero error and infinite PSNR") {
    const ScalarField b = make_smooth_image(16, 12, 3);
    const MetricReport r = metrics(b, b);
    CHECK(r.rmse == 0.0);
    REQUIRE(r.psnr);
    CHECK(std::isinf(*r.psnr));
    CHECK(format_metric(r.psnr) == "inf");
    REQUIRE(r.rel_l2);
    CHECK(*r.rel_l2 == 0.0);
}

TEST_CASE("zero reference: relative error is undefined") {
    const ScalarField b(8, 8);
    ScalarField a(8, 8);
    for (double& v : a.values()) v = 1.0;
    const MetricReport r = metrics(a, b);
    CHECK(r.rmse == doctest::Approx(1.0));
    CHECK_FALSE(r.rel_l2);
    CHECK_FALSE(r.psnr);
    CHECK(format_metric(r.rel_l2) == "undefined");
}

TEST_CASE("checkerboard pair, worked by hand") {
    // b alternates 0/1; a = 1 - b flips every cell except a 2x2 corner
    // that copies b. 60 of 64 cells differ by 1.
    ScalarField a(8, 8), b(8, 8);
    for (std::size_t i2 = 0; i2 < 8; ++i2)
        for (std::size_t i1 = 0; i1 < 8; ++i1) {
            b(i1, i2) = static_cast<double>((i1 + i2) % 2);
            a(i1, i2) = (i1 < 2 && i2 < 2) ? b(i1, i2) : 1.0 - b(i1, i2);
        }
    const MetricReport r = metrics(a, b);
    CHECK(r.rmse == doctest::Approx(std::sqrt(60.0 / 64.0)));
    CHECK(*r.psnr == doctest::Approx(20.0 * std::log10(1.0 / std::sqrt(60.0 / 64.0))));
    CHECK(*r.rel_l2 == doctest::Approx(std::sqrt(60.0 / 32.0)));
    CHECK_THROWS_AS(metrics(a, ScalarField(8, 7)), DimensionError);
}

TEST_CASE("row FWHM of box and triangle profiles") {
    ScalarField f(11, 3);
    for (std::size_t r = 0; r < 3; ++r) {
        // Box over samples 4..6; the half level is crossed at 3.5 and 6.5.
        for (std::size_t j = 4; j <= 6; ++j) f(j, r) = 2.0;
    }
    CHECK(row_fwhm(f, 1) == doctest::Approx(3.0));
    CHECK(strip_fwhm(f) == doctest::Approx(3.0));

    ScalarField t(11, 3);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t j = 0; j < 11; ++j) t(j, r) = std::max(0.0, 4.0 - std::abs(static_cast<double>(j) - 5.0));
    // Half level 2 is crossed at j = 3 and j = 7.
    CHECK(row_fwhm(t, 0) == doctest::Approx(4.0));
}

TEST_CASE("a single bright sample has unit width") {
    PatternSettings p;
    const ScalarField s = make_white_strip(p);
    CHECK(strip_fwhm(s) == doctest::Approx(1.0));
}

TEST_CASE("interface positions and variance") {
    ScalarField f(10, 4);
    const std::size_t edge[] = {3, 5, 5, 7};
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t j = 0; j < edge[r]; ++j) f(j, r) = 1.0;
    const auto pos = interface_positions(f);
    REQUIRE(pos.size() == 4);
    for (std::size_t r = 0; r < 4; ++r) CHECK(pos[r] == doctest::Approx(static_cast<double>(edge[r])));
    // Mean 5, squared deviations 4, 0, 0, 4.
    CHECK(interface_variance(f) == doctest::Approx(2.0));

    ScalarField straight(10, 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t j = 0; j < 6; ++j) straight(j, r) = 3.0;
    CHECK(interface_variance(straight) == doctest::Approx(0.0));
}

TEST_CASE("format_metric prints full precision") {
    CHECK(format_metric(0.1) == "0.10000000000000001");
    CHECK(format_metric(std::optional<double>{}) == "undefined");
    CHECK(format_metric(-std::numeric_limits<double>::infinity()) == "-inf");
}
