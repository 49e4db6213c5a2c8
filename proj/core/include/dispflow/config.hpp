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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dispflow/flows.hpp"
#include "dispflow/tomo.hpp"
#include "dispflow/varsolve.hpp"

namespace dispflow {

/// Evaluates a product/quotient of decimal numbers and `pi`, e.g. "pi/90",
/// "2*pi/3", "1e-6". Throws InvalidArgument on anything else.
double parse_number(const std::string& text);

/// Raw configuration: "section.key" -> value, in file order of keys.
using ConfigMap = std::map<std::string, std::string>;

/// Line-based format: "[section]" headers, "key = value" lines, '#' or ';'
/// comments. Keys before the first header belong to section "experiment".
ConfigMap parse_config_text(std::istream& is);
ConfigMap load_config_file(const std::filesystem::path& path);

enum class ExperimentKind { Tomography, Strip, Interface, Jitter };

/// (k, p) pair of one flow run.
struct FlowCase {
    int k = 1;
    int p = 2;
};

struct TomographySettings {
    std::size_t n = 128;
    double angle_step = 0.0;  ///< 0 selects pi/90
    double a = 0.0;           ///< perturbation bound
    double noise = 0.0;       ///< sigma as a fraction of the clean sinogram max
    SheppLoganVariant variant = SheppLoganVariant::HighContrast;
    FbpFilter filter = FbpFilter::RamLak;
    std::size_t n_offsets = 0;
};

struct FlowSettings {
    FlowParams params;
    double t_end = 1e-3;
    /// Explicit beta; otherwise beta_scale * range / dx^k when set, else default_beta.
    std::optional<double> beta;
    std::optional<double> beta_scale;
    double steady_tol = 1e-6;  ///< used when t_end is "steady"
    bool to_steady = false;
    std::size_t max_steps = 2'000'000;
    std::vector<FlowCase> cases;  ///< strip and interface runs
    std::vector<double> t_end_candidates;
};

struct VarsolveSettings {
    EnergyParams params;
    std::optional<double> eps_rel;  ///< eps = eps_rel * range^2 when set
    int iterations = 50;
};

struct DiscreteSettings {
    int max_shift = 5;  ///< jitter bound, also the column block width
    int k = 1;
};

struct PatternSettings {
    std::size_t n1 = 40, n2 = 40;
    double dx1 = 0.1;
    std::size_t width = 1;
    double intensity = 255.0;
    std::size_t n = 16;        ///< interface and jitter image size
    double amplitude = 0.15;   ///< interface bend, fraction of the width
};

struct ExperimentConfig {
    std::string name = "experiment";
    ExperimentKind kind = ExperimentKind::Tomography;
    std::vector<std::string> stages;       ///< empty selects the full pipeline
    std::vector<std::string> corrections;  ///< empty selects {"none"}
    std::vector<std::string> metrics;      ///< empty selects every metric
    std::filesystem::path output_dir;      ///< empty writes nothing
    std::uint64_t seed = 7;
    std::uint64_t validation_seed = 101;

    TomographySettings tomo;
    FlowSettings flow;
    VarsolveSettings varsolve;
    DiscreteSettings discrete;
    PatternSettings pattern;

    /// Throws InvalidArgument for stages, corrections, metrics or parameters
    /// outside their domains.
    void validate() const;
};

/// Canonical stage order for a kind; a config runs a prefix of it.
std::vector<std::string> pipeline_stages(ExperimentKind kind);

/// Builds a config, rejecting unknown keys.
ExperimentConfig make_config(const ConfigMap& map);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Serializes back to the file format; make_config(parse(...)) round trips.
std::string dump_config(const ExperimentConfig& cfg);

const char* to_string(ExperimentKind kind);

}  // namespace dispflow
