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

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dispflow/discrete.hpp"
#include "dispflow/grid.hpp"
#include "dispflow/tomo.hpp"
#include "dispflow/varsolve.hpp"

namespace dispflow {

/// Free-form key=value pairs carried in a field file header.
using FieldMetadata = std::map<std::string, std::string>;

struct LoadedField {
    ScalarField field;
    FieldMetadata metadata;
};

// CSV: one header comment with shape, spacing and metadata, then n2 lines of
// n1 values each. Values use 17 significant digits, so round trips are exact.
void write_field_csv(std::ostream& os, const ScalarField& f, const FieldMetadata& meta = {});
LoadedField read_field_csv(std::istream& is);

// Binary 16-bit PGM (P5). The comment line stores the float range so that
// reading restores values to within range / 65535.
void write_field_pgm(std::ostream& os, const ScalarField& f);
ScalarField read_field_pgm(std::istream& is);

/// Format chosen by extension: .pgm or .csv.
void write_image(const std::filesystem::path& path, const ScalarField& f, const FieldMetadata& meta = {});
ScalarField read_image(const std::filesystem::path& path);
LoadedField read_image_with_metadata(const std::filesystem::path& path);

/// Sinogram data as a field CSV (fov and offset spacing in the header) and
/// its angles as a separate CSV.
void write_sinogram(const std::filesystem::path& data_path, const std::filesystem::path& angles_path,
                    const Sinogram& s);
Sinogram read_sinogram(const std::filesystem::path& data_path, const std::filesystem::path& angles_path);

void write_angles_csv(std::ostream& os, const std::vector<double>& angles);
std::vector<double> read_angles_csv(std::istream& is);

void write_shifts_csv(std::ostream& os, const IntShiftField& shifts);
void write_trace_csv(std::ostream& os, const IterTrace& trace);
/// Two-column series "step,<name>".
void write_series_csv(std::ostream& os, const std::string& name, const std::vector<double>& values);

/// Opens path for writing, creating parent directories; throws on failure.
std::ofstream open_output(const std::filesystem::path& path, bool binary = false);
std::ifstream open_input(const std::filesystem::path& path, bool binary = false);

}  // namespace dispflow
