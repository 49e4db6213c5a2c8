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

#include <optional>
#include <string>
#include <vector>

#include "dispflow/grid.hpp"

namespace dispflow {

/// Parameters of the lagged convex functional
///
///   Fc(u; v) = 1/2 sum dA (u - v)^2 / w(v) + alpha * R_{i,k,p}(u),
///
/// with w(v) = (d1 v)^2 + eps (q = 2) or |d1 v| + eps (q = 1).
struct EnergyParams {
    Axis axis = Axis::X1;
    int k = 1;
    int p = 2;
    int q = 2;
    double alpha = 1.0;
    double eps = 1e-3;
    double beta = 1e-6;  ///< smoothing of |d^k u| when p == 1

    double cg_tol = 1e-8;
    int cg_max_iter = 20000;
    double fixed_point_tol = 1e-6;
    int fixed_point_max_iter = 5000;

    void validate() const;
};

/// Regularizer R_{i,k,p}. p = 2: 1/2 sum dA (D_k u)^2. p = 1: sum dA
/// (sqrt((D_k u)^2 + beta^2) - beta), which is the plain total variation
/// for beta = 0. D_k is `variation`.
double energy_R(const ScalarField& u, Axis axis, int k, int p, double beta = 0.0);

/// 1/2 sum dA (u - u_ref)^2 / ((d1 u)^2 + eps)
double energy_D2(const ScalarField& u, const ScalarField& u_ref, double eps);
/// 1/2 sum dA (u - u_ref)^2 / (|d1 u| + eps)
double energy_D1(const ScalarField& u, const ScalarField& u_ref, double eps);

/// Pointwise integrand of D1 (q = 1) or D2 (q = 2) before quadrature.
ScalarField data_density(const ScalarField& u, const ScalarField& u_ref, double eps, int q);

/// Lagged weights w(v) of the convex data term.
ScalarField lag_weights(const ScalarField& v, int q, double eps);

/// Fc(u; u_prev)
double convex_energy(const ScalarField& u, const ScalarField& u_prev, const EnergyParams& params);

struct SolveStats {
    int iterations = 0;        ///< total CG iterations
    int outer_iterations = 0;  ///< fixed-point sweeps (1 for p == 2)
    double residual = 0.0;     ///< final relative CG residual
};

/// Unique minimizer of Fc(.; u_prev).
ScalarField convex_step(const ScalarField& u_prev, const EnergyParams& params, SolveStats* stats = nullptr);

/// L2 norm of (u - u_prev)/alpha - w(u_prev) (-1)^(k-1) d^k(d^k u / |d^k u|^(2-p)),
/// the semi-implicit flow relation with time step alpha.
double semi_implicit_residual(const ScalarField& u, const ScalarField& u_prev, const EnergyParams& params);

struct IterRecord {
    int m = 0;
    double fc = 0.0;         ///< Fc(u_m; u_{m-1})
    double r = 0.0;          ///< R(u_m)
    double du_l2 = 0.0;      ///< ||u_m - u_{m-1}||_L2
    double grad_linf = 0.0;  ///< ||d1 u_m||_Linf
};

struct MonotonicityViolation {
    int m = 0;
    std::string check;
    double excess = 0.0;  ///< how far the inequality is violated
};

struct IterTrace {
    double r0 = 0.0;                 ///< R(u_0)
    double grad_linf0 = 0.0;         ///< ||d1 u_0||_Linf
    std::vector<IterRecord> records;
    std::vector<MonotonicityViolation> violations;

    bool monotone() const noexcept { return violations.empty(); }
};

struct IterateResult {
    ScalarField u;
    IterTrace trace;
};

/// Relative slack granted to the monotonicity checks.
inline constexpr double kMonotonicitySlack = 1e-9;

/// Lagged iteration u_m = argmin Fc(.; u_{m-1}) from u_0.
///
/// Stops after m_max steps or once ||u_m - u_{m-1}||_L2 <= stop_tol
/// (default 1e-6 ||u_0||_L2). Every step is checked against the
/// monotonicity chain Fc(u_{m+1};u_m) <= alpha R(u_m) <= Fc(u_m;u_{m-1}) and
/// the decay bound ||u_m - u_{m-1}||^2 / (2 (C^q + eps)) <= Fc_m - Fc_{m+1};
/// failures land in trace.violations rather than throwing.
IterateResult iterate(const ScalarField& u0, const EnergyParams& params, int m_max = 500,
                      std::optional<double> stop_tol = std::nullopt);

}  // namespace dispflow
