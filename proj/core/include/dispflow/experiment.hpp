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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dispflow/config.hpp"
#include "dispflow/discrete.hpp"
#include "dispflow/flows.hpp"
#include "dispflow/metrics.hpp"
#include "dispflow/tomo.hpp"

namespace dispflow {

// Test images.

/// Bright vertical band of pattern.width columns, centred, on a zero
/// background; spacing dx1 along both axes.
ScalarField make_white_strip(const PatternSettings& pattern);

/// Indicator of x1 < 1/2 + amplitude * sin(2 pi x2) on an n x n grid over (0, 1)^2.
ScalarField make_curved_interface(std::size_t n, double amplitude);

/// Smooth random image: a sum of four cosines with frequencies (cycles per
/// unit length) drawn below max_freq1 along X1 and max_freq2 along X2,
/// rescaled to [0, 1].
ScalarField make_smooth_image(std::size_t n1, std::size_t n2, std::uint64_t seed, double max_freq1 = 3.0,
                              double max_freq2 = 3.0);

/// i.i.d. integer row shifts, uniform on [-max_shift, max_shift].
std::vector<int> sample_row_shifts(std::size_t rows, int max_shift, std::uint64_t seed);

/// FlowParams of the settings with beta fixed for data u.
FlowParams resolve_flow_params(const FlowSettings& flow, const ScalarField& u);

// Tomography pipeline pieces.

struct TomographyCase {
    ScalarField phantom;
    Sinogram clean;     ///< unperturbed, noise free
    Sinogram measured;  ///< perturbed angles and noise
    AngularPerturbation perturbation;
    double noise_sigma = 0.0;
    std::uint64_t perturbation_seed = 0;
    std::uint64_t noise_seed = 0;
};

/// Phantom and sinograms for a seed. Perturbation and noise draw from
/// independent streams derived from it.
TomographyCase simulate_tomography(const TomographySettings& tomo, std::uint64_t seed);

struct CorrectionOutput {
    ScalarField data;
    std::vector<double> residuals;  ///< flow: norm_linf(rhs) per step
    IterTrace trace;                ///< varsolve only
    IntShiftField shifts;           ///< assign and discrete only
};

/// Applies one named correction ("none", "flow", "varsolve", "assign",
/// "discrete") to a data field using the config's settings.
CorrectionOutput apply_correction(const ScalarField& data, const std::string& correction, const ExperimentConfig& cfg);

// Experiments.

struct BranchResult {
    std::string label;
    MetricReport report;
    ScalarField output;
};

struct ExperimentResult {
    std::vector<BranchResult> branches;
    std::vector<std::filesystem::path> artifacts;

    /// Throws InvalidArgument if no branch has this label.
    const BranchResult& branch(const std::string& label) const;
};

/// Runs the configured pipeline. When output_dir is set every intermediate
/// field, series and a metrics table are written there, plus a manifest;
/// a failing stage leaves a FAILED file listing what was written.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct Calibration {
    double best_t_end = 0.0;
    std::vector<double> candidates;
    std::vector<double> rmse;
};

/// Flow stopping time that minimizes reconstruction RMSE for the tomography
/// config on cfg.validation_seed. Empty candidates select
/// cfg.flow.t_end_candidates.
Calibration calibrate_t_end(const ExperimentConfig& cfg, std::span<const double> candidates = {});

}  // namespace dispflow
