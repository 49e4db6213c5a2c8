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

// Command line front end. Every verb wraps one library operation; numeric
// flags share the config-file spelling and parser, so "--a=pi/18" on the
// command line and "a = pi/18" in a config mean the same thing.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "dispflow/config.hpp"
#include "dispflow/error.hpp"
#include "dispflow/experiment.hpp"
#include "dispflow/io.hpp"
#include "dispflow/metrics.hpp"
#include "dispflow/random.hpp"
#include "dispflow/tomo.hpp"

namespace fs = std::filesystem;
using namespace dispflow;

namespace {

// Flags that map one-to-one onto "section.key" config entries.
class KeyFlags {
public:
    KeyFlags(CLI::App* app, std::string section, std::vector<std::pair<std::string, std::string>> keys)
        : section_(std::move(section)) {
        for (auto& [key, help] : keys) app->add_option("--" + key, values_[key], help);
    }

    void merge_into(ConfigMap& map) const {
        for (const auto& [key, value] : values_)
            if (!value.empty()) map[section_ + "." + key] = value;
    }

private:
    std::string section_;
    std::map<std::string, std::string> values_;
};

struct Common {
    std::string config;
    std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "config file supplying defaults")->check(CLI::ExistingFile);
    app->add_option("--set", c.sets, "override as section.key=value (repeatable)");
}

// Config file first, then --set, then the verb's own flags.
ExperimentConfig build_config(const Common& c, const std::vector<const KeyFlags*>& flags) {
    ConfigMap map;
    if (!c.config.empty()) map = load_config_file(c.config);
    for (const std::string& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw InvalidArgument("--set expects section.key=value, got '" + s + "'");
        std::string key = s.substr(0, eq);
        if (key.find('.') == std::string::npos) key = "experiment." + key;
        map[key] = s.substr(eq + 1);
    }
    for (const KeyFlags* f : flags) f->merge_into(map);
    return make_config(map);
}

const std::vector<std::pair<std::string, std::string>> kTomoKeys = {
    {"n", "image size"},
    {"angle-step", "projection angle step, e.g. pi/90"},
    {"offsets", "offset samples per projection (0 = default)"},
    {"variant", "phantom variant: high-contrast | standard"},
    {"filter", "reconstruction filter: ram-lak | shepp-logan | none"},
};

const std::vector<std::pair<std::string, std::string>> kFlowKeys = {
    {"axis", "x1 | x2"},      {"k", "derivative order 1 | 2"}, {"p", "1 | 2"}, {"q", "mobility exponent 1 | 2"},
    {"eps", "mobility floor"}, {"cfl", "CFL safety factor"},    {"max-dt", "step cap"},
    {"beta", "quotient smoothing for p = 1"},
    {"beta-scale", "beta as a fraction of range / dx^k"},
    {"t-end", "stopping time or 'steady'"},
    {"steady-tol", "relative residual for 'steady'"},
    {"max-steps", "step limit for 'steady'"},
};

const std::vector<std::pair<std::string, std::string>> kVarsolveKeys = {
    {"axis", "x1 | x2"}, {"k", "1 | 2"}, {"p", "1 | 2"}, {"q", "1 | 2"},
    {"alpha", "regularization weight"}, {"eps", "data term floor"},
    {"eps-rel", "eps as a fraction of range^2"}, {"beta", "smoothing for p = 1"},
    {"cg-tol", "inner solver tolerance"}, {"iterations", "outer iterations"},
};

const std::vector<std::pair<std::string, std::string>> kDiscreteKeys = {
    {"max-shift", "shift bound M (block width for assign)"},
    {"k", "difference order 1 | 2"},
};

fs::path angles_path_for(const fs::path& data) {
    fs::path p = data;
    p.replace_filename(data.stem().string() + "_angles.csv");
    return p;
}

std::vector<double> angles_for(const TomographySettings& t) {
    const double step = t.angle_step > 0.0 ? t.angle_step : std::numbers::pi / 90.0;
    const auto count = static_cast<std::size_t>(std::llround(std::numbers::pi / step));
    if (count < 2 || std::abs(static_cast<double>(count) * step - std::numbers::pi) > 1e-9)
        throw InvalidArgument("angle step must divide pi into at least two angles");
    return uniform_angles(count);
}

void print_report(const MetricReport& r) {
    std::printf("rmse,%s\npsnr,%s\nrel_l2,%s\n", format_metric(r.rmse).c_str(), format_metric(r.psnr).c_str(),
                format_metric(r.rel_l2).c_str());
}

// Field in, field out verbs keep the input's metadata so a sinogram stays
// readable as a sinogram.
void write_like(const fs::path& out, const ScalarField& f, const FieldMetadata& meta) {
    if (out.extension() == ".csv") write_image(out, f, meta);
    else write_image(out, f);
}

int run(int argc, char** argv) {
    CLI::App app{"dispflow: displacement-error correction by anisotropic flows"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every verb");

    // phantom
    Common c_ph;
    std::string ph_out;
    CLI::App* ph = app.add_subcommand("phantom", "rasterize the Shepp-Logan phantom");
    add_common(ph, c_ph);
    KeyFlags ph_keys(ph, "tomography", {{"n", "image size"}, {"variant", "high-contrast | standard"}});
    ph->add_option("-o,--out", ph_out, "output image (.csv or .pgm)")->required();

    // sinogram and perturb
    Common c_sg;
    std::string sg_in, sg_out;
    CLI::App* sg = app.add_subcommand("sinogram", "parallel-beam projections of an image");
    add_common(sg, c_sg);
    KeyFlags sg_keys(sg, "tomography", kTomoKeys);
    sg->add_option("-i,--in", sg_in, "input image")->required()->check(CLI::ExistingFile);
    sg->add_option("-o,--out", sg_out, "sinogram CSV; angles go to <stem>_angles.csv")->required();

    Common c_pt;
    std::string pt_in, pt_out, pt_disp;
    CLI::App* pt = app.add_subcommand("perturb", "projections at displaced angles, labelled with the nominal ones");
    add_common(pt, c_pt);
    KeyFlags pt_keys(pt, "tomography",
                     [] {
                         auto k = kTomoKeys;
                         k.push_back({"a", "displacement bound, d ~ U[0, a]"});
                         k.push_back({"noise", "noise sigma as a fraction of the clean maximum"});
                         return k;
                     }());
    KeyFlags pt_seed(pt, "experiment", {{"seed", "random seed"}});
    pt->add_option("-i,--in", pt_in, "input image")->required()->check(CLI::ExistingFile);
    pt->add_option("-o,--out", pt_out, "sinogram CSV; angles go to <stem>_angles.csv")->required();
    pt->add_option("--displacement-out", pt_disp, "CSV of the drawn displacements");

    // flow
    Common c_fl;
    std::string fl_in, fl_out, fl_res;
    CLI::App* fl = app.add_subcommand("flow", "evolve a field under one member of the flow family");
    add_common(fl, c_fl);
    KeyFlags fl_keys(fl, "flow", kFlowKeys);
    fl->add_option("-i,--in", fl_in, "input field")->required()->check(CLI::ExistingFile);
    fl->add_option("-o,--out", fl_out, "output field")->required();
    fl->add_option("--residuals-out", fl_res, "CSV of the rhs max norm per step");

    // varsolve
    Common c_vs;
    std::string vs_in, vs_out, vs_trace;
    CLI::App* vs = app.add_subcommand("varsolve", "lagged convex iteration for the nonconvex energy");
    add_common(vs, c_vs);
    KeyFlags vs_keys(vs, "varsolve", kVarsolveKeys);
    vs->add_option("-i,--in", vs_in, "input field")->required()->check(CLI::ExistingFile);
    vs->add_option("-o,--out", vs_out, "output field")->required();
    vs->add_option("--trace-out", vs_trace, "CSV of the iteration trace");

    // jitter and assign
    Common c_jt, c_as;
    std::string jt_in, jt_out, jt_shifts, as_in, as_out, as_shifts;
    CLI::App* jt = app.add_subcommand("jitter", "exhaustive per-row shift correction");
    add_common(jt, c_jt);
    KeyFlags jt_keys(jt, "discrete", kDiscreteKeys);
    jt->add_option("-i,--in", jt_in, "input image")->required()->check(CLI::ExistingFile);
    jt->add_option("-o,--out", jt_out, "corrected image")->required();
    jt->add_option("--shifts-out", jt_shifts, "CSV of recovered row shifts");

    CLI::App* as = app.add_subcommand("assign", "block-wise column reordering heuristic");
    add_common(as, c_as);
    KeyFlags as_keys(as, "discrete", kDiscreteKeys);
    as->add_option("-i,--in", as_in, "input field")->required()->check(CLI::ExistingFile);
    as->add_option("-o,--out", as_out, "reordered field")->required();
    as->add_option("--shifts-out", as_shifts, "CSV of column displacements");

    // fbp
    Common c_fb;
    std::string fb_in, fb_angles, fb_out;
    CLI::App* fb = app.add_subcommand("fbp", "filtered backprojection of a sinogram");
    add_common(fb, c_fb);
    KeyFlags fb_keys(fb, "tomography", {{"n", "output size"}, {"filter", "ram-lak | shepp-logan | none"}});
    fb->add_option("-i,--in", fb_in, "sinogram CSV")->required()->check(CLI::ExistingFile);
    fb->add_option("--angles", fb_angles, "angles CSV (default <stem>_angles.csv)");
    fb->add_option("-o,--out", fb_out, "reconstruction")->required();

    // metrics
    std::string mt_in, mt_ref;
    CLI::App* mt = app.add_subcommand("metrics", "compare a field with a reference");
    mt->add_option("-i,--in", mt_in, "field")->required()->check(CLI::ExistingFile);
    mt->add_option("-r,--ref", mt_ref, "reference field")->required()->check(CLI::ExistingFile);

    // experiment
    Common c_ex;
    std::string ex_out;
    bool ex_calibrate = false;
    CLI::App* ex = app.add_subcommand("experiment", "run a configured pipeline and write its artifacts");
    add_common(ex, c_ex);
    KeyFlags ex_tomo(ex, "tomography",
                     {{"n", "image size"}, {"angle-step", "angle step"}, {"a", "displacement bound"},
                      {"noise", "noise fraction"}});
    KeyFlags ex_seed(ex, "experiment", {{"seed", "random seed"}});
    ex->add_option("-o,--output", ex_out, "artifact directory (overrides the config)");
    ex->add_flag("--calibrate", ex_calibrate,
                 "pick the flow stopping time on the validation seed before running");

    CLI11_PARSE(app, argc, argv);

    if (ph->parsed()) {
        const ExperimentConfig cfg = build_config(c_ph, {&ph_keys});
        write_image(ph_out, shepp_logan(cfg.tomo.n, cfg.tomo.variant));
    } else if (sg->parsed() || pt->parsed()) {
        const bool perturbed = pt->parsed();
        const ExperimentConfig cfg = perturbed ? build_config(c_pt, {&pt_keys, &pt_seed}) : build_config(c_sg, {&sg_keys});
        const ScalarField f = read_image(perturbed ? pt_in : sg_in);
        const std::vector<double> angles = angles_for(cfg.tomo);
        Sinogram s;
        if (perturbed) {
            const AngularPerturbation d =
                sample_uniform_displacement(angles, cfg.tomo.a, Rng::derive(cfg.seed, kPerturbationStream));
            const double sigma = cfg.tomo.noise > 0.0 ? cfg.tomo.noise * radon(f, angles, cfg.tomo.n_offsets).data.max() : 0.0;
            s = radon_perturbed(f, angles, cfg.tomo.n_offsets, d, sigma, Rng::derive(cfg.seed, kNoiseStream));
            if (!pt_disp.empty()) {
                auto os = open_output(pt_disp);
                write_series_csv(os, "d", d.d);
            }
        } else {
            s = radon(f, angles, cfg.tomo.n_offsets);
        }
        const fs::path out = perturbed ? pt_out : sg_out;
        write_sinogram(out, angles_path_for(out), s);
    } else if (fl->parsed()) {
        const ExperimentConfig cfg = build_config(c_fl, {&fl_keys});
        const LoadedField in = read_image_with_metadata(fl_in);
        const CorrectionOutput r = apply_correction(in.field, "flow", cfg);
        write_like(fl_out, r.data, in.metadata);
        if (!fl_res.empty()) {
            auto os = open_output(fl_res);
            write_series_csv(os, "rhs_linf", r.residuals);
        }
    } else if (vs->parsed()) {
        const ExperimentConfig cfg = build_config(c_vs, {&vs_keys});
        const LoadedField in = read_image_with_metadata(vs_in);
        const CorrectionOutput r = apply_correction(in.field, "varsolve", cfg);
        write_like(vs_out, r.data, in.metadata);
        if (!vs_trace.empty()) {
            auto os = open_output(vs_trace);
            write_trace_csv(os, r.trace);
        }
        if (!r.trace.monotone())
            std::fprintf(stderr, "dispflow: warning: %zu monotonicity violations, see the trace\n",
                         r.trace.violations.size());
    } else if (jt->parsed() || as->parsed()) {
        const bool rows = jt->parsed();
        const ExperimentConfig cfg = rows ? build_config(c_jt, {&jt_keys}) : build_config(c_as, {&as_keys});
        const LoadedField in = read_image_with_metadata(rows ? jt_in : as_in);
        const CorrectionOutput r = apply_correction(in.field, rows ? "discrete" : "assign", cfg);
        write_like(rows ? jt_out : as_out, r.data, in.metadata);
        const std::string& shifts = rows ? jt_shifts : as_shifts;
        if (!shifts.empty()) {
            auto os = open_output(shifts);
            write_shifts_csv(os, r.shifts);
        }
    } else if (fb->parsed()) {
        const ExperimentConfig cfg = build_config(c_fb, {&fb_keys});
        const fs::path angles = fb_angles.empty() ? angles_path_for(fb_in) : fs::path(fb_angles);
        write_image(fb_out, fbp(read_sinogram(fb_in, angles), cfg.tomo.n, cfg.tomo.filter));
    } else if (mt->parsed()) {
        print_report(metrics(read_image(mt_in), read_image(mt_ref)));
    } else if (ex->parsed()) {
        ExperimentConfig cfg = build_config(c_ex, {&ex_tomo, &ex_seed});
        if (!ex_out.empty()) cfg.output_dir = ex_out;
        if (ex_calibrate) {
            const Calibration cal = calibrate_t_end(cfg);
            std::printf("t_end,validation_rmse\n");
            for (std::size_t j = 0; j < cal.candidates.size(); ++j)
                std::printf("%s,%s\n", format_metric(cal.candidates[j]).c_str(), format_metric(cal.rmse[j]).c_str());
            std::printf("# selected t_end %s\n", format_metric(cal.best_t_end).c_str());
            cfg.flow.t_end = cal.best_t_end;
            cfg.flow.to_steady = false;
        }
        const ExperimentResult res = run_experiment(cfg);
        std::printf("branch,rmse,psnr,rel_l2\n");
        for (const BranchResult& b : res.branches)
            std::printf("%s,%s,%s,%s\n", b.label.c_str(), format_metric(b.report.rmse).c_str(),
                        format_metric(b.report.psnr).c_str(), format_metric(b.report.rel_l2).c_str());
        if (!cfg.output_dir.empty())
            std::printf("# %zu artifacts in %s\n", res.artifacts.size(), cfg.output_dir.string().c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "dispflow: error: %s\n", e.what());
        return 1;
    }
}
