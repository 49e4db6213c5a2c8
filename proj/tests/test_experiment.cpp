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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>

#include "doctest.h"
#include "dispflow/config.hpp"
#include "dispflow/error.hpp"
#include "dispflow/experiment.hpp"

using namespace dispflow;
namespace fs = std::filesystem;

namespace {

ExperimentConfig from_text(const std::string& text) {
    std::istringstream is(text);
    return make_config(parse_config_text(is));
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "dispflow_test_experiment" / name;
    fs::remove_all(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

const char* kSmallTomography =
    "[experiment]\nkind = tomography\ncorrections = none, flow, varsolve, assign\n"
    "[tomography]\nn = 32\nangle-step = pi/30\na = pi/30\nnoise = 0.01\n"
    "[flow]\nk = 1\np = 2\nq = 1\nt-end = 1e-3\n"
    "[varsolve]\niterations = 3\neps-rel = 1e-3\nalpha = 1e-3\n"
    "[discrete]\nmax-shift = 3\n";

}  // namespace

TEST_CASE("test images") {
    PatternSettings p;
    const ScalarField s = make_white_strip(p);
    CHECK(s.max() == 255.0);
    CHECK(s.dx1() == 0.1);
    CHECK(s.dx2() == 0.1);
    std::size_t lit = 0;
    for (double v : s.values()) lit += v > 0.0;
    CHECK(lit == p.n2 * p.width);

    const ScalarField c = make_curved_interface(16, 0.15);
    CHECK(c.min() == 0.0);
    CHECK(c.max() == 1.0);
    CHECK(interface_variance(c) > 0.0);
    CHECK(interface_variance(make_curved_interface(16, 0.0)) == doctest::Approx(0.0));

    const ScalarField m = make_smooth_image(20, 10, 4);
    CHECK(m.min() == doctest::Approx(0.0));
    CHECK(m.max() == doctest::Approx(1.0));
    CHECK(m == make_smooth_image(20, 10, 4));

    const auto d = sample_row_shifts(500, 3, 9);
    CHECK(*std::min_element(d.begin(), d.end()) == -3);
    CHECK(*std::max_element(d.begin(), d.end()) == 3);
}

TEST_CASE("simulation streams are independent") {
    TomographySettings t;
    t.n = 32;
    t.angle_step = std::numbers::pi / 20;
    const TomographyCase clean = simulate_tomography(t, 5);
    CHECK(clean.measured.data == clean.clean.data);

    t.a = 0.1;
    const TomographyCase pert = simulate_tomography(t, 5);
    t.noise = 0.05;
    const TomographyCase noisy = simulate_tomography(t, 5);
    CHECK(noisy.perturbation.d == pert.perturbation.d);
    CHECK(noisy.noise_sigma == doctest::Approx(0.05 * clean.clean.data.max()));
    CHECK_FALSE(noisy.measured.data == pert.measured.data);
    CHECK(pert.perturbation_seed != pert.noise_seed);

    t.angle_step = 0.7;
    CHECK_THROWS_AS(simulate_tomography(t, 5), InvalidArgument);
}

TEST_CASE("tomography pipeline writes branches and artifacts") {
    ExperimentConfig cfg = from_text(kSmallTomography);
    cfg.output_dir = fresh_dir("tomo");
    const ExperimentResult r = run_experiment(cfg);
    REQUIRE(r.branches.size() == 4);
    for (const char* label : {"none", "flow", "varsolve", "assign"}) {
        const BranchResult& b = r.branch(label);
        CHECK(b.output.n1() == 32);
        CHECK(std::isfinite(b.report.rmse));
        CHECK(fs::exists(cfg.output_dir / (std::string("recon_") + label + ".csv")));
    }
    CHECK_THROWS_AS(r.branch("missing"), InvalidArgument);
    for (const char* f : {"phantom.csv", "phantom.pgm", "sinogram_measured.csv", "sinogram_measured_angles.csv",
                          "displacement.csv", "trace_varsolve.csv", "shifts_assign.csv", "residuals_flow.csv",
                          "metrics.csv", "manifest.txt"})
        CHECK_MESSAGE(fs::exists(cfg.output_dir / f), f);
    CHECK_FALSE(fs::exists(cfg.output_dir / "FAILED"));
    const std::string table = slurp(cfg.output_dir / "metrics.csv");
    CHECK(table.rfind("branch,rmse,psnr,rel_l2,fwhm,interface_variance\n", 0) == 0);
    CHECK(slurp(cfg.output_dir / "manifest.txt").find(dump_config(cfg)) != std::string::npos);
}

TEST_CASE("identical config and seed give bitwise identical csv files") {
    ExperimentConfig a = from_text(kSmallTomography);
    ExperimentConfig b = a;
    a.output_dir = fresh_dir("det_a");
    b.output_dir = fresh_dir("det_b");
    run_experiment(a);
    run_experiment(b);
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(a.output_dir)) {
        if (e.path().extension() != ".csv") continue;
        const fs::path other = b.output_dir / e.path().filename();
        REQUIRE(fs::exists(other));
        CHECK_MESSAGE(slurp(e.path()) == slurp(other), e.path().filename().string());
        ++compared;
    }
    CHECK(compared >= 10);

    ExperimentConfig c = a;
    c.seed = a.seed + 1;
    c.output_dir.clear();
    CHECK_FALSE(run_experiment(c).branch("none").output == run_experiment(ExperimentConfig(b)).branch("none").output);
}

TEST_CASE("stage prefixes stop the pipeline early") {
    ExperimentConfig cfg = from_text(std::string(kSmallTomography) + "[experiment]\nstages = phantom, sinogram\n");
    cfg.output_dir = fresh_dir("prefix");
    const ExperimentResult r = run_experiment(cfg);
    CHECK(r.branches.empty());
    CHECK(fs::exists(cfg.output_dir / "sinogram_measured.csv"));
    CHECK_FALSE(fs::exists(cfg.output_dir / "recon_none.csv"));
    CHECK_FALSE(fs::exists(cfg.output_dir / "metrics.csv"));
}

TEST_CASE("strip experiment widens the strip along x1") {
    const ExperimentConfig cfg = from_text("kind = strip\n[flow]\nt-end = 1e-6\ncases = 1:2, 2:2\n");
    const ExperimentResult r = run_experiment(cfg);
    REQUIRE(r.branches.size() == 3);
    const double w0 = *r.branch("input").report.fwhm;
    CHECK(w0 == doctest::Approx(1.0));
    CHECK(*r.branch("k1p2").report.fwhm > w0);
    CHECK(*r.branch("k2p2").report.fwhm > w0);
}

TEST_CASE("interface experiment straightens the interface") {
    const ExperimentConfig cfg = from_text(
        "kind = interface\n[flow]\naxis = x2\nq = 2\nt-end = steady\nsteady-tol = 1e-4\ncases = 1:2\n");
    const ExperimentResult r = run_experiment(cfg);
    CHECK(*r.branch("k1p2").report.interface_variance < 0.1 * *r.branch("input").report.interface_variance);
}

TEST_CASE("jitter experiment") {
    const ExperimentConfig cfg = from_text("kind = jitter\ncorrections = none, discrete\n[pattern]\nn = 32\n[discrete]\nmax-shift = 2\n");
    const ExperimentResult r = run_experiment(cfg);
    REQUIRE(r.branches.size() == 2);
    CHECK(r.branch("discrete").report.rmse <= r.branch("none").report.rmse);
}

TEST_CASE("a failing stage leaves a FAILED marker") {
    ExperimentConfig cfg = from_text(
        "kind = interface\n[flow]\naxis = x2\nt-end = steady\nsteady-tol = 1e-12\nmax-steps = 5\ncases = 1:2\n");
    cfg.output_dir = fresh_dir("failed");
    CHECK_THROWS_AS(run_experiment(cfg), ConvergenceError);
    REQUIRE(fs::exists(cfg.output_dir / "FAILED"));
    const std::string marker = slurp(cfg.output_dir / "FAILED");
    CHECK(marker.find("stage: flow") != std::string::npos);
    CHECK(marker.find("input.csv") != std::string::npos);
    CHECK_FALSE(fs::exists(cfg.output_dir / "manifest.txt"));
}

TEST_CASE("corrections are dispatched by name") {
    const ExperimentConfig cfg = from_text(kSmallTomography);
    const ScalarField f = make_smooth_image(16, 16, 2);
    CHECK(apply_correction(f, "none", cfg).data == f);
    CHECK(apply_correction(f, "discrete", cfg).shifts.shifts.size() == 16);
    CHECK_THROWS_AS(apply_correction(f, "hungarian", cfg), InvalidArgument);
}

TEST_CASE("stopping time calibration") {
    const ExperimentConfig cfg = from_text(kSmallTomography);
    const std::vector<double> cands{1e-5, 1e-3, 1e-1};
    const Calibration cal = calibrate_t_end(cfg, cands);
    REQUIRE(cal.rmse.size() == 3);
    const auto best = std::min_element(cal.rmse.begin(), cal.rmse.end()) - cal.rmse.begin();
    CHECK(cal.best_t_end == cands[static_cast<std::size_t>(best)]);
    CHECK(calibrate_t_end(cfg, cands).rmse == cal.rmse);
    CHECK_THROWS_AS(calibrate_t_end(cfg, std::vector<double>{}), InvalidArgument);
    CHECK_THROWS_AS(calibrate_t_end(from_text("kind = strip\n"), cands), InvalidArgument);
}
