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
#include <optional>
#include <vector>

#include "dispflow/grid.hpp"

namespace dispflow {

/// Selects one member of the displacement-filtering flow family
///
///   du/dt = (-1)^(k-1) (|d1 u|^q + eps) d_i^k( d_i^k u / |d_i^k u|^(2-p) ).
///
/// For p = 1 the magnitude in the quotient is smoothed to sqrt(s^2 + beta^2).
struct FlowParams {
    Axis axis = Axis::X1;
    int k = 1;
    int p = 2;
    int q = 2;
    double beta = 1e-6;      ///< quotient smoothing, used when p == 1
    double eps = 0.0;        ///< additive mobility floor
    double cfl = 0.9;        ///< safety factor in (0, 1]
    double max_dt = 1.0;     ///< returned by stable_dt when the mobility vanishes

    /// Throws InvalidArgument when a parameter is out of its domain.
    void validate() const;
};

/// beta = 1e-6 * dynamic range of u, the default quotient smoothing.
double default_beta(const ScalarField& u);

struct FlowState {
    ScalarField u;
    double t = 0.0;
    std::size_t steps = 0;
    double last_dt = 0.0;
};

struct FlowRun {
    FlowState state;
    /// norm_linf(flow_rhs) evaluated before every accepted step.
    std::vector<double> residuals;
};

ScalarField flow_rhs(const ScalarField& u, const FlowParams& params);

/// Largest forward-Euler step allowed by the frozen-coefficient parabolic
/// bound cfl * dx^(2k) / (4^k * max(mobility * quotient slope)).
double stable_dt(const ScalarField& u, const FlowParams& params);

/// Forward Euler from u0 up to exactly t_end.
///
/// Each step uses stable_dt, or dt_override when given (unchecked), cut to
/// land on t_end. Throws StabilityError if the state stops being finite.
FlowRun evolve(const ScalarField& u0, const FlowParams& params, double t_end,
               std::optional<double> dt_override = std::nullopt);

/// Steps until norm_linf(rhs) < rel_tol * norm_linf(rhs at t=0) or max_steps
/// is reached. `converged` tells which.
struct SteadyRun {
    FlowRun run;
    bool converged = false;
};
SteadyRun evolve_to_steady(const ScalarField& u0, const FlowParams& params, double rel_tol,
                           std::size_t max_steps);

}  // namespace dispflow
