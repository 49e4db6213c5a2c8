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

#include "dispflow/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dispflow/error.hpp"
#include "line_ops.hpp"

namespace dispflow {

void FlowParams::validate() const {
    auto in12 = [](int v) { return v == 1 || v == 2; };
    if (!in12(k)) throw InvalidArgument("flow order k must be 1 or 2");
    if (!in12(p)) throw InvalidArgument("flow power p must be 1 or 2");
    if (!in12(q)) throw InvalidArgument("mobility power q must be 1 or 2");
    if (p == 1 && !(beta > 0.0)) throw InvalidArgument("beta must be positive when p == 1");
    if (!(eps >= 0.0)) throw InvalidArgument("mobility floor eps must be non-negative");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidArgument("cfl factor must lie in (0, 1]");
    if (!(max_dt > 0.0)) throw InvalidArgument("max_dt must be positive");
}

double default_beta(const ScalarField& u) {
    const double r = u.dynamic_range();
    return 1e-6 * (r > 0.0 ? r : 1.0);
}

namespace {

// Reusable buffers for one evaluation of the right-hand side.
struct Workspace {
    std::vector<double> mobility;
    std::vector<double> line, s, qs, slope, out;
};

double quotient(double s, int p, double beta) {
    return p == 2 ? s : s / std::sqrt(s * s + beta * beta);
}

double quotient_slope(double s, int p, double beta) {
    if (p == 2) return 1.0;
    const double r = s * s + beta * beta;
    return beta * beta / (r * std::sqrt(r));
}

// Evaluates the flow right-hand side into `rhs` and returns the stiffness
// max_j mobility_j * slope_j that drives the step bound.
double evaluate(const ScalarField& u, const FlowParams& prm, ScalarField& rhs, Workspace& ws) {
    const std::size_t n1 = u.n1();
    const double* uv = u.values().data();

    // mobility |d1 u|^q + eps, central difference along X1
    ws.mobility.resize(u.size());
    {
        const auto n = static_cast<std::ptrdiff_t>(n1);
        const double inv = 1.0 / (2.0 * u.dx1());
        for (std::size_t i2 = 0; i2 < u.n2(); ++i2) {
            const double* r = uv + i2 * n1;
            for (std::ptrdiff_t j = 0; j < n; ++j) {
                const double g = (r[reflect_index(j + 1, n)] - r[reflect_index(j - 1, n)]) * inv;
                const double a = std::abs(g);
                ws.mobility[i2 * n1 + static_cast<std::size_t>(j)] = (prm.q == 2 ? a * a : a) + prm.eps;
            }
        }
    }

    const auto lay = detail::line_layout(u, prm.axis);
    const std::size_t n = lay.length;
    const double h = u.spacing(prm.axis);
    ws.line.resize(n);
    ws.s.resize(n);
    ws.qs.resize(n);
    ws.slope.resize(n);
    ws.out.resize(n);
    double stiffness = 0.0;
    double* rv = rhs.values().data();

    for (std::size_t line = 0; line < lay.count; ++line) {
        const std::size_t b = lay.base(line, n1);
        for (std::size_t j = 0; j < n; ++j) ws.line[j] = uv[b + j * lay.stride];

        if (prm.k == 1) {
            // faces j+1/2; the last face has zero flux
            for (std::size_t j = 0; j + 1 < n; ++j) ws.s[j] = (ws.line[j + 1] - ws.line[j]) / h;
            ws.s[n - 1] = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                ws.qs[j] = quotient(ws.s[j], prm.p, prm.beta);
                ws.slope[j] = quotient_slope(ws.s[j], prm.p, prm.beta);
            }
            for (std::size_t j = 0; j < n; ++j) {
                const double right = j + 1 < n ? ws.qs[j] : 0.0;
                const double left = j > 0 ? ws.qs[j - 1] : 0.0;
                ws.out[j] = (right - left) / h;
                double g = 0.0;
                if (j + 1 < n) g = ws.slope[j];
                if (j > 0) g = std::max(g, ws.slope[j - 1]);
                const double m = ws.mobility[b + j * lay.stride];
                stiffness = std::max(stiffness, m * g);
            }
        } else {
            const auto sn = static_cast<std::ptrdiff_t>(n);
            const double h2 = h * h;
            for (std::ptrdiff_t j = 0; j < sn; ++j) {
                const double l = ws.line[static_cast<std::size_t>(reflect_index(j - 1, sn))];
                const double r = ws.line[static_cast<std::size_t>(reflect_index(j + 1, sn))];
                const double s = (l - 2.0 * ws.line[static_cast<std::size_t>(j)] + r) / h2;
                ws.s[static_cast<std::size_t>(j)] = s;
                ws.qs[static_cast<std::size_t>(j)] = quotient(s, prm.p, prm.beta);
                ws.slope[static_cast<std::size_t>(j)] = quotient_slope(s, prm.p, prm.beta);
            }
            for (std::ptrdiff_t j = 0; j < sn; ++j) {
                const auto jl = static_cast<std::size_t>(reflect_index(j - 1, sn));
                const auto jr = static_cast<std::size_t>(reflect_index(j + 1, sn));
                const auto jc = static_cast<std::size_t>(j);
                ws.out[jc] = -(ws.qs[jl] - 2.0 * ws.qs[jc] + ws.qs[jr]) / h2;
                const double g = std::max({ws.slope[jl], ws.slope[jc], ws.slope[jr]});
                stiffness = std::max(stiffness, ws.mobility[b + jc * lay.stride] * g);
            }
        }
        for (std::size_t j = 0; j < n; ++j) rv[b + j * lay.stride] = ws.mobility[b + j * lay.stride] * ws.out[j];
    }
    return stiffness;
}

double dt_from_stiffness(double stiffness, double h, const FlowParams& prm) {
    const double hk = prm.k == 1 ? h * h : h * h * h * h;
    const double scale = prm.k == 1 ? 4.0 : 16.0;
    if (!(stiffness > 0.0)) return prm.max_dt;
    const double dt = prm.cfl * hk / (scale * stiffness);
    if (!std::isfinite(dt) || dt <= 0.0) return prm.max_dt;
    return std::min(dt, prm.max_dt);
}

void check_inputs(const ScalarField& u, const FlowParams& prm) {
    prm.validate();
    require_stencil(u, prm.axis, prm.k);
    require_stencil(u, Axis::X1, 1);
}

}  // namespace

ScalarField flow_rhs(const ScalarField& u, const FlowParams& params) {
    check_inputs(u, params);
    ScalarField rhs(u.n1(), u.n2(), u.dx1(), u.dx2());
    Workspace ws;
    evaluate(u, params, rhs, ws);
    return rhs;
}

double stable_dt(const ScalarField& u, const FlowParams& params) {
    check_inputs(u, params);
    ScalarField rhs(u.n1(), u.n2(), u.dx1(), u.dx2());
    Workspace ws;
    const double stiffness = evaluate(u, params, rhs, ws);
    return dt_from_stiffness(stiffness, u.spacing(params.axis), params);
}

namespace {

// Shared stepping loop; `stop` sees (residual, step) and returns true to halt.
template <class Stop>
FlowRun march(const ScalarField& u0, const FlowParams& params, double t_end,
              std::optional<double> dt_override, Stop&& stop) {
    check_inputs(u0, params);
    if (!u0.all_finite()) throw StabilityError("initial state is not finite");
    FlowRun run;
    run.state.u = u0;
    ScalarField rhs(u0.n1(), u0.n2(), u0.dx1(), u0.dx2());
    Workspace ws;
    const double h = u0.spacing(params.axis);
    auto& st = run.state;
    while (st.t < t_end) {
        const double stiffness = evaluate(st.u, params, rhs, ws);
        const double res = norm_linf(rhs);
        if (stop(res, st.steps)) break;
        run.residuals.push_back(res);
        double dt = dt_override ? *dt_override : dt_from_stiffness(stiffness, h, params);
        const double remaining = t_end - st.t;
        const bool last = dt >= remaining;
        if (last) dt = remaining;

        double* uv = st.u.values().data();
        const double* rv = rhs.values().data();
        bool finite = true;
        for (std::size_t i = 0; i < st.u.size(); ++i) {
            uv[i] += dt * rv[i];
            finite = finite && std::isfinite(uv[i]);
        }
        if (!finite)
            throw StabilityError("flow state became non-finite at step " + std::to_string(st.steps) +
                                 " (t=" + std::to_string(st.t) + ", dt=" + std::to_string(dt) + ")");
        st.t = last ? t_end : st.t + dt;
        st.last_dt = dt;
        ++st.steps;
    }
    return run;
}

}  // namespace

FlowRun evolve(const ScalarField& u0, const FlowParams& params, double t_end,
               std::optional<double> dt_override) {
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be finite and non-negative");
    if (dt_override && !(*dt_override > 0.0)) throw InvalidArgument("dt override must be positive");
    return march(u0, params, t_end, dt_override, [](double, std::size_t) { return false; });
}

SteadyRun evolve_to_steady(const ScalarField& u0, const FlowParams& params, double rel_tol,
                           std::size_t max_steps) {
    if (!(rel_tol > 0.0)) throw InvalidArgument("rel_tol must be positive");
    SteadyRun out;
    double initial = -1.0;
    bool converged = false;
    out.run = march(u0, params, std::numeric_limits<double>::infinity(), std::nullopt,
                    [&](double res, std::size_t step) {
                        if (initial < 0.0) initial = res;
                        if (res <= rel_tol * initial) {
                            converged = true;
                            return true;
                        }
                        return step >= max_steps;
                    });
    out.converged = converged;
    return out;
}

}  // namespace dispflow
