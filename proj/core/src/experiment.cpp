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

#include "dispflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dispflow/discrete.hpp"
#include "dispflow/error.hpp"
#include "dispflow/io.hpp"
#include "dispflow/random.hpp"
#include "dispflow/varsolve.hpp"

namespace dispflow {

namespace {

constexpr double kPi = std::numbers::pi;

class ArtifactSink {
public:
    explicit ArtifactSink(std::filesystem::path dir) : dir_(std::move(dir)) {}

    bool enabled() const { return !dir_.empty(); }
    const std::vector<std::filesystem::path>& written() const { return written_; }

    void field(const std::string& stem, const ScalarField& f, bool with_pgm = false) {
        if (!enabled()) return;
        write_image(dir_ / (stem + ".csv"), f);
        written_.push_back(dir_ / (stem + ".csv"));
        if (with_pgm) {
            write_image(dir_ / (stem + ".pgm"), f);
            written_.push_back(dir_ / (stem + ".pgm"));
        }
    }

    void sinogram(const std::string& stem, const Sinogram& s) {
        if (!enabled()) return;
        write_sinogram(dir_ / (stem + ".csv"), dir_ / (stem + "_angles.csv"), s);
        written_.push_back(dir_ / (stem + ".csv"));
        written_.push_back(dir_ / (stem + "_angles.csv"));
    }

    template <class Fn>
    void text(const std::string& name, Fn&& fn) {
        if (!enabled()) return;
        auto os = open_output(dir_ / name);
        fn(os);
        written_.push_back(dir_ / name);
    }

    void fail(const std::string& stage, const std::string& what) {
        if (!enabled()) return;
        auto os = open_output(dir_ / "FAILED");
        os << "stage: " << stage << "\nerror: " << what << "\npartial artifacts:\n";
        for (const auto& p : written_) os << "  " << p.filename().string() << "\n";
    }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
};

bool wants(const ExperimentConfig& cfg, const std::string& stage) {
    const auto& st = cfg.stages.empty() ? pipeline_stages(cfg.kind) : cfg.stages;
    return std::find(st.begin(), st.end(), stage) != st.end();
}

std::vector<std::string> corrections_of(const ExperimentConfig& cfg) {
    return cfg.corrections.empty() ? std::vector<std::string>{"none"} : cfg.corrections;
}

std::vector<FlowCase> cases_of(const ExperimentConfig& cfg) {
    if (!cfg.flow.cases.empty()) return cfg.flow.cases;
    return {{cfg.flow.params.k, cfg.flow.params.p}};
}

std::string case_label(const FlowCase& c) { return "k" + std::to_string(c.k) + "p" + std::to_string(c.p); }

void write_metrics_table(std::ostream& os, const ExperimentConfig& cfg, const std::vector<BranchResult>& branches) {
    static const std::vector<std::string> all = {"rmse", "psnr", "rel_l2", "fwhm", "interface_variance"};
    const auto& sel = cfg.metrics.empty() ? all : cfg.metrics;
    os << "branch";
    for (const auto& m : sel) os << ',' << m;
    os << '\n';
    for (const auto& b : branches) {
        os << b.label;
        for (const auto& m : sel) {
            os << ',';
            if (m == "rmse") os << format_metric(b.report.rmse);
            else if (m == "psnr") os << format_metric(b.report.psnr);
            else if (m == "rel_l2") os << format_metric(b.report.rel_l2);
            else if (m == "fwhm") os << format_metric(b.report.fwhm);
            else os << format_metric(b.report.interface_variance);
        }
        os << '\n';
    }
}

ScalarField run_flow(const ScalarField& u, const FlowSettings& flow, const FlowParams& params,
                     std::vector<double>& residuals) {
    if (flow.to_steady) {
        SteadyRun sr = evolve_to_steady(u, params, flow.steady_tol, flow.max_steps);
        if (!sr.converged)
            throw ConvergenceError("flow did not reach the steady tolerance within max-steps",
                                   static_cast<int>(sr.run.state.steps),
                                   sr.run.residuals.empty() ? 0.0 : sr.run.residuals.back());
        residuals = std::move(sr.run.residuals);
        return std::move(sr.run.state.u);
    }
    FlowRun run = evolve(u, params, flow.t_end);
    residuals = std::move(run.residuals);
    return std::move(run.state.u);
}

struct StageGuard {
    ArtifactSink& sink;
    std::string stage = "setup";
};

ExperimentResult run_tomography(const ExperimentConfig& cfg, ArtifactSink& sink, StageGuard& g) {
    ExperimentResult res;
    g.stage = "phantom";
    if (!wants(cfg, "sinogram")) {
        const ScalarField ph = shepp_logan(cfg.tomo.n, cfg.tomo.variant);
        sink.field("phantom", ph, true);
        return res;
    }
    g.stage = "sinogram";
    const TomographyCase tc = simulate_tomography(cfg.tomo, cfg.seed);
    sink.field("phantom", tc.phantom, true);
    sink.sinogram("sinogram_clean", tc.clean);
    sink.sinogram("sinogram_measured", tc.measured);
    sink.text("displacement.csv", [&](std::ostream& os) { write_series_csv(os, "d", tc.perturbation.d); });

    std::vector<std::pair<std::string, Sinogram>> corrected;
    if (wants(cfg, "correct")) {
        g.stage = "correct";
        for (const auto& c : corrections_of(cfg)) {
            CorrectionOutput out = apply_correction(tc.measured.data, c, cfg);
            Sinogram s = tc.measured;
            s.data = std::move(out.data);
            if (c != "none") sink.sinogram("sinogram_" + c, s);
            if (!out.residuals.empty())
                sink.text("residuals_" + c + ".csv", [&](std::ostream& os) { write_series_csv(os, "rhs_linf", out.residuals); });
            if (c == "varsolve") sink.text("trace_varsolve.csv", [&](std::ostream& os) { write_trace_csv(os, out.trace); });
            if (c == "assign") sink.text("shifts_assign.csv", [&](std::ostream& os) { write_shifts_csv(os, out.shifts); });
            corrected.emplace_back(c, std::move(s));
        }
    }
    if (!wants(cfg, "fbp")) return res;
    g.stage = "fbp";
    for (auto& [label, s] : corrected) {
        BranchResult b;
        b.label = label;
        b.output = fbp(s, cfg.tomo.n, cfg.tomo.filter);
        sink.field("recon_" + label, b.output, true);
        res.branches.push_back(std::move(b));
    }
    if (wants(cfg, "metrics")) {
        g.stage = "metrics";
        for (auto& b : res.branches) b.report = metrics(b.output, tc.phantom);
    }
    return res;
}

ExperimentResult run_jitter(const ExperimentConfig& cfg, ArtifactSink& sink, StageGuard& g) {
    ExperimentResult res;
    g.stage = "pattern";
    const ScalarField original = shepp_logan(std::max<std::size_t>(cfg.pattern.n, 16), cfg.tomo.variant);
    sink.field("original", original, true);
    if (!wants(cfg, "jitter")) return res;
    g.stage = "jitter";
    const auto d = sample_row_shifts(original.n2(), cfg.discrete.max_shift, Rng::derive(cfg.seed, kJitterStream));
    const ScalarField observed = shift_rows(original, d);
    sink.field("jittered", observed, true);
    sink.text("shifts_true.csv", [&](std::ostream& os) {
        write_shifts_csv(os, IntShiftField{Axis::X1, d, cfg.discrete.max_shift});
    });
    if (!wants(cfg, "correct")) return res;
    g.stage = "correct";
    for (const auto& c : corrections_of(cfg)) {
        CorrectionOutput out = apply_correction(observed, c, cfg);
        if (c == "discrete") sink.text("shifts_discrete.csv", [&](std::ostream& os) { write_shifts_csv(os, out.shifts); });
        if (!out.residuals.empty())
            sink.text("residuals_" + c + ".csv", [&](std::ostream& os) { write_series_csv(os, "rhs_linf", out.residuals); });
        sink.field("corrected_" + c, out.data, true);
        res.branches.push_back({c, {}, std::move(out.data)});
    }
    if (wants(cfg, "metrics")) {
        g.stage = "metrics";
        for (auto& b : res.branches) b.report = metrics(b.output, original);
    }
    return res;
}

ExperimentResult run_pattern_flows(const ExperimentConfig& cfg, ArtifactSink& sink, StageGuard& g) {
    ExperimentResult res;
    const bool strip = cfg.kind == ExperimentKind::Strip;
    g.stage = "pattern";
    const ScalarField input = strip ? make_white_strip(cfg.pattern) : make_curved_interface(cfg.pattern.n, cfg.pattern.amplitude);
    sink.field("input", input, true);
    auto measure = [&](BranchResult& b) {
        b.report = metrics(b.output, input);
        if (strip) b.report.fwhm = strip_fwhm(b.output);
        else b.report.interface_variance = interface_variance(b.output);
    };
    BranchResult base{"input", {}, input};
    if (!wants(cfg, "flow")) return res;
    g.stage = "flow";
    res.branches.push_back(std::move(base));
    for (const FlowCase& fc : cases_of(cfg)) {
        FlowSettings fs = cfg.flow;
        fs.params.k = fc.k;
        fs.params.p = fc.p;
        const FlowParams prm = resolve_flow_params(fs, input);
        std::vector<double> residuals;
        BranchResult b;
        b.label = case_label(fc);
        b.output = run_flow(input, fs, prm, residuals);
        sink.field("output_" + b.label, b.output, true);
        sink.text("residuals_" + b.label + ".csv", [&](std::ostream& os) { write_series_csv(os, "rhs_linf", residuals); });
        res.branches.push_back(std::move(b));
    }
    if (wants(cfg, "metrics")) {
        g.stage = "metrics";
        for (auto& b : res.branches) measure(b);
    }
    return res;
}

}  // namespace

ScalarField make_white_strip(const PatternSettings& p) {
    if (p.n1 < 3 || p.n2 < 3 || p.width < 1 || p.width >= p.n1)
        throw InvalidArgument("strip needs n1, n2 >= 3 and 1 <= width < n1");
    ScalarField f(p.n1, p.n2, p.dx1, p.dx1);
    const std::size_t start = (p.n1 - p.width) / 2;
    for (std::size_t r = 0; r < p.n2; ++r)
        for (std::size_t j = start; j < start + p.width; ++j) f(j, r) = p.intensity;
    return f;
}

ScalarField make_curved_interface(std::size_t n, double amplitude) {
    if (n < 5) throw InvalidArgument("interface image needs n >= 5");
    const double h = 1.0 / static_cast<double>(n);
    return sample(n, n, h, h, [&](double x1, double x2) {
        return x1 < 0.5 + amplitude * std::sin(2.0 * kPi * x2) ? 1.0 : 0.0;
    });
}

ScalarField make_smooth_image(std::size_t n1, std::size_t n2, std::uint64_t seed, double max_freq1, double max_freq2) {
    if (!(max_freq1 >= 0.0) || !(max_freq2 >= 0.0)) throw InvalidArgument("frequency bounds must be >= 0");
    Rng rng(seed);
    struct Mode {
        double a, f1, f2, ph;
    };
    std::vector<Mode> modes(4);
    for (auto& m : modes)
        m = {0.5 + rng.uniform(), max_freq1 * rng.uniform(), max_freq2 * rng.uniform(), 2.0 * kPi * rng.uniform()};
    ScalarField f = sample(n1, n2, 1.0 / static_cast<double>(n1), 1.0 / static_cast<double>(n2), [&](double x1, double x2) {
        double v = 0.0;
        for (const auto& m : modes) v += m.a * std::cos(2.0 * kPi * (m.f1 * x1 + m.f2 * x2) + m.ph);
        return v;
    });
    const double lo = f.min(), range = f.dynamic_range();
    if (range > 0.0)
        for (double& v : f.values()) v = (v - lo) / range;
    return f;
}

std::vector<int> sample_row_shifts(std::size_t rows, int max_shift, std::uint64_t seed) {
    if (max_shift < 0) throw InvalidArgument("shift bound must be >= 0");
    Rng rng(seed);
    std::vector<int> d(rows);
    const int span = 2 * max_shift + 1;
    for (int& v : d) v = std::min(span - 1, static_cast<int>(rng.uniform() * span)) - max_shift;
    return d;
}

FlowParams resolve_flow_params(const FlowSettings& flow, const ScalarField& u) {
    FlowParams prm = flow.params;
    if (flow.beta) {
        prm.beta = *flow.beta;
    } else if (flow.beta_scale) {
        const double h = u.spacing(prm.axis);
        prm.beta = *flow.beta_scale * std::max(u.dynamic_range(), 1e-300) / std::pow(h, prm.k);
    } else {
        prm.beta = default_beta(u);
    }
    prm.validate();
    return prm;
}

TomographyCase simulate_tomography(const TomographySettings& tomo, std::uint64_t seed) {
    TomographyCase tc;
    tc.phantom = shepp_logan(tomo.n, tomo.variant);
    const double step = tomo.angle_step > 0.0 ? tomo.angle_step : kPi / 90.0;
    const auto count = static_cast<std::size_t>(std::llround(kPi / step));
    if (count < 2 || std::abs(static_cast<double>(count) * step - kPi) > 1e-9)
        throw InvalidArgument("angle step must divide pi into at least two angles");
    const std::vector<double> angles = uniform_angles(count);
    tc.clean = radon(tc.phantom, angles, tomo.n_offsets);
    tc.perturbation_seed = Rng::derive(seed, kPerturbationStream);
    tc.noise_seed = Rng::derive(seed, kNoiseStream);
    tc.perturbation = sample_uniform_displacement(angles, tomo.a, tc.perturbation_seed);
    tc.noise_sigma = tomo.noise * tc.clean.data.max();
    tc.measured = radon_perturbed(tc.phantom, angles, tomo.n_offsets, tc.perturbation, tc.noise_sigma, tc.noise_seed);
    return tc;
}

CorrectionOutput apply_correction(const ScalarField& data, const std::string& correction, const ExperimentConfig& cfg) {
    CorrectionOutput out;
    if (correction == "none") {
        out.data = data;
    } else if (correction == "flow") {
        out.data = run_flow(data, cfg.flow, resolve_flow_params(cfg.flow, data), out.residuals);
    } else if (correction == "varsolve") {
        EnergyParams prm = cfg.varsolve.params;
        if (cfg.varsolve.eps_rel) prm.eps = *cfg.varsolve.eps_rel * data.dynamic_range() * data.dynamic_range();
        IterateResult r = iterate(data, prm, cfg.varsolve.iterations);
        out.data = std::move(r.u);
        out.trace = std::move(r.trace);
    } else if (correction == "assign") {
        DiscreteResult r = block_assign_columns(data, std::max(cfg.discrete.max_shift, 1), cfg.discrete.k);
        out.data = std::move(r.image);
        out.shifts = std::move(r.shifts);
    } else if (correction == "discrete") {
        DiscreteResult r = jitter_correct_rows(data, cfg.discrete.max_shift, cfg.discrete.k);
        out.data = std::move(r.image);
        out.shifts = std::move(r.shifts);
    } else {
        throw InvalidArgument("unknown correction '" + correction + "'");
    }
    return out;
}

const BranchResult& ExperimentResult::branch(const std::string& label) const {
    for (const auto& b : branches)
        if (b.label == label) return b;
    throw InvalidArgument("no branch '" + label + "' in experiment result");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ArtifactSink sink(cfg.output_dir);
    StageGuard guard{sink};
    try {
        ExperimentResult res;
        switch (cfg.kind) {
            case ExperimentKind::Tomography: res = run_tomography(cfg, sink, guard); break;
            case ExperimentKind::Jitter: res = run_jitter(cfg, sink, guard); break;
            case ExperimentKind::Strip:
            case ExperimentKind::Interface: res = run_pattern_flows(cfg, sink, guard); break;
        }
        guard.stage = "report";
        if (!res.branches.empty() && wants(cfg, "metrics"))
            sink.text("metrics.csv", [&](std::ostream& os) { write_metrics_table(os, cfg, res.branches); });
        sink.text("manifest.txt", [&](std::ostream& os) {
            os << "# seed " << cfg.seed << " perturbation-seed " << Rng::derive(cfg.seed, kPerturbationStream)
               << " noise-seed " << Rng::derive(cfg.seed, kNoiseStream) << " jitter-seed "
               << Rng::derive(cfg.seed, kJitterStream) << "\n"
               << dump_config(cfg);
        });
        res.artifacts = sink.written();
        return res;
    } catch (const std::exception& e) {
        sink.fail(guard.stage, e.what());
        throw;
    }
}

Calibration calibrate_t_end(const ExperimentConfig& cfg, std::span<const double> candidates) {
    if (cfg.kind != ExperimentKind::Tomography) throw InvalidArgument("t_end calibration applies to tomography configs");
    cfg.validate();
    Calibration cal;
    cal.candidates.assign(candidates.begin(), candidates.end());
    if (cal.candidates.empty()) cal.candidates = cfg.flow.t_end_candidates;
    if (cal.candidates.empty()) throw InvalidArgument("no t_end candidates to calibrate over");

    const TomographyCase tc = simulate_tomography(cfg.tomo, cfg.validation_seed);
    double best = std::numeric_limits<double>::infinity();
    for (double t : cal.candidates) {
        if (!(t > 0.0)) throw InvalidArgument("t_end candidates must be positive");
        ExperimentConfig c = cfg;
        c.flow.t_end = t;
        c.flow.to_steady = false;
        Sinogram s = tc.measured;
        s.data = apply_correction(tc.measured.data, "flow", c).data;
        const double e = metrics(fbp(s, cfg.tomo.n, cfg.tomo.filter), tc.phantom).rmse;
        cal.rmse.push_back(e);
        if (e < best) {
            best = e;
            cal.best_t_end = t;
        }
    }
    return cal;
}

}  // namespace dispflow
