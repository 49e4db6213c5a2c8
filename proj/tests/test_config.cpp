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

#include <numbers>
#include <sstream>
#include <string>

#include "doctest.h"
#include "dispflow/config.hpp"
#include "dispflow/error.hpp"

using namespace dispflow;

namespace {

ExperimentConfig from_text(const std::string& text) {
    std::istringstream is(text);
    return make_config(parse_config_text(is));
}

}  // namespace

TEST_CASE("parse_number accepts products and quotients of pi") {
    constexpr double pi = std::numbers::pi;
    CHECK(parse_number("1e-6") == 1e-6);
    CHECK(parse_number("pi") == pi);
    CHECK(parse_number("pi/90") == doctest::Approx(pi / 90));
    CHECK(parse_number("2*pi/3") == doctest::Approx(2 * pi / 3));
    CHECK(parse_number(" -0.5 ") == -0.5);
    CHECK_THROWS_AS(parse_number(""), InvalidArgument);
    CHECK_THROWS_AS(parse_number("pi+1"), InvalidArgument);
    CHECK_THROWS_AS(parse_number("abc"), InvalidArgument);
    CHECK_THROWS_AS(parse_number("1/0"), InvalidArgument);
}

TEST_CASE("sections, comments and the default section") {
    std::istringstream is(
        "name = demo   # trailing comment\n"
        "; full line comment\n"
        "\n"
        "[tomography]\n"
        "n = 64\n"
        "a = pi/30\n");
    const ConfigMap m = parse_config_text(is);
    CHECK(m.at("experiment.name") == "demo");
    CHECK(m.at("tomography.n") == "64");
    CHECK(m.at("tomography.a") == "pi/30");
    CHECK(m.size() == 3);

    std::istringstream bad("[tomography\nn = 1\n");
    CHECK_THROWS(parse_config_text(bad));
    std::istringstream novalue("[flow]\njust-a-word\n");
    CHECK_THROWS(parse_config_text(novalue));
}

TEST_CASE("typed settings") {
    const ExperimentConfig c = from_text(
        "[experiment]\nkind = tomography\ncorrections = none, flow\nseed = 11\n"
        "[tomography]\nn = 64\nangle-step = pi/45\na = pi/18\nnoise = 0.01\nfilter = shepp-logan\n"
        "[flow]\nk = 1\np = 2\nq = 1\nt-end = 3e-3\n");
    CHECK(c.kind == ExperimentKind::Tomography);
    CHECK(c.seed == 11);
    CHECK(c.corrections == std::vector<std::string>{"none", "flow"});
    CHECK(c.tomo.n == 64);
    CHECK(c.tomo.angle_step == doctest::Approx(std::numbers::pi / 45));
    CHECK(c.tomo.filter == FbpFilter::SheppLogan);
    CHECK(c.flow.params.q == 1);
    CHECK(c.flow.t_end == 3e-3);
    CHECK_FALSE(c.flow.to_steady);

    const ExperimentConfig s = from_text("kind = interface\n[flow]\nt-end = steady\ncases = 1:2, 2:1\n");
    CHECK(s.flow.to_steady);
    REQUIRE(s.flow.cases.size() == 2);
    CHECK(s.flow.cases[1].k == 2);
    CHECK(s.flow.cases[1].p == 1);
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(from_text("[flow]\ndt = 1\n"), InvalidArgument);
    CHECK_THROWS_AS(from_text("[nosuch]\nx = 1\n"), InvalidArgument);
    CHECK_THROWS_AS(from_text("kind = movie\n"), InvalidArgument);
    CHECK_THROWS_AS(from_text("[flow]\nk = 3\n"), InvalidArgument);
    CHECK_THROWS_AS(from_text("[tomography]\nn = 8\n"), InvalidArgument);
    CHECK_THROWS_AS(from_text("[tomography]\nfilter = hann\n"), InvalidArgument);
    CHECK_THROWS_AS(from_text("corrections = discrete\n"), InvalidArgument);
    CHECK_THROWS_AS(from_text("metrics = ssim\n"), InvalidArgument);
}

TEST_CASE("stage lists must be a prefix of the pipeline") {
    CHECK(pipeline_stages(ExperimentKind::Tomography) ==
          std::vector<std::string>{"phantom", "sinogram", "correct", "fbp", "metrics"});
    CHECK_NOTHROW(from_text("stages = phantom, sinogram\n"));
    CHECK_THROWS_AS(from_text("stages = phantom, fbp\n"), InvalidArgument);
    CHECK_THROWS_AS(from_text("stages = sinogram\n"), InvalidArgument);
    CHECK_NOTHROW(from_text("kind = jitter\nstages = pattern, jitter\n"));
}

TEST_CASE("dump and reparse is a fixed point") {
    const ExperimentConfig c = from_text(
        "[experiment]\nname = rt\nkind = tomography\ncorrections = none, flow, varsolve\n"
        "metrics = rmse, psnr\noutput = out/rt\nseed = 3\nvalidation-seed = 5\n"
        "[tomography]\nn = 32\na = pi/30\nnoise = 0.02\nvariant = standard\n"
        "[flow]\nk = 2\np = 1\nq = 1\nbeta-scale = 0.1\nt-end-candidates = 1e-4, 1e-3\n"
        "[varsolve]\neps-rel = 1e-3\niterations = 7\n"
        "[discrete]\nmax-shift = 3\nk = 2\n");
    const std::string once = dump_config(c);
    const ExperimentConfig d = from_text(once);
    CHECK(dump_config(d) == once);
    CHECK(d.name == "rt");
    CHECK(d.output_dir == "out/rt");
    CHECK(d.validation_seed == 5);
    CHECK(d.tomo.variant == SheppLoganVariant::Standard);
    CHECK(d.tomo.a == c.tomo.a);
    CHECK(d.flow.beta_scale == c.flow.beta_scale);
    CHECK(d.flow.t_end_candidates == c.flow.t_end_candidates);
    CHECK(d.varsolve.eps_rel == c.varsolve.eps_rel);
    CHECK(d.varsolve.iterations == 7);
    CHECK(d.discrete.max_shift == 3);
}
