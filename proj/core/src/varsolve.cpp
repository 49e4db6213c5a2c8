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

#include "dispflow/varsolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "dispflow/error.hpp"

namespace dispflow {

void EnergyParams::validate() const {
    auto in12 = [](int v) { return v == 1 || v == 2; };
    if (!in12(k)) throw InvalidArgument("order k must be 1 or 2");
    if (!in12(p)) throw InvalidArgument("power p must be 1 or 2");
    if (!in12(q)) throw InvalidArgument("data variant q must be 1 or 2");
    if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    if (p == 1 && !(beta > 0.0)) throw InvalidArgument("beta must be positive when p == 1");
    if (!(cg_tol > 0.0) || cg_max_iter < 1) throw InvalidArgument("invalid CG settings");
    if (!(fixed_point_tol > 0.0) || fixed_point_max_iter < 1)
        throw InvalidArgument("invalid fixed-point settings");
}

namespace {

double dot(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
    return s;
}

void require_same(const ScalarField& a, const ScalarField& b) {
    if (!a.same_shape(b)) throw DimensionError("fields must have the same dimensions");
}

// Per-face coefficients c = 1 / sqrt(s^2 + beta^2) of the lagged TV operator.
ScalarField tv_coefficients(const ScalarField& u, const EnergyParams& prm) {
    ScalarField c = variation(u, prm.axis, prm.k);
    for (double& v : c.values()) v = 1.0 / std::sqrt(v * v + prm.beta * prm.beta);
    return c;
}

// Jacobi-preconditioned CG for x/w + alpha D^T(c D x) = b.
int solve_spd(const ScalarField& w, const ScalarField& c, const ScalarField& b, ScalarField& x,
              const EnergyParams& prm, double& rel_residual) {
    auto apply = [&](const ScalarField& v) {
        ScalarField dv = variation(v, prm.axis, prm.k);
        auto dvv = dv.values();
        const auto cv = c.values();
        for (std::size_t i = 0; i < dvv.size(); ++i) dvv[i] *= cv[i];
        ScalarField out = variation_adjoint(dv, prm.axis, prm.k);
        auto ov = out.values();
        const auto vv = v.values();
        const auto wv = w.values();
        for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = vv[i] / wv[i] + prm.alpha * ov[i];
        return out;
    };

    ScalarField diag = variation_gram_diagonal(c, prm.axis, prm.k);
    {
        auto dv = diag.values();
        const auto wv = w.values();
        for (std::size_t i = 0; i < dv.size(); ++i) dv[i] = 1.0 / (1.0 / wv[i] + prm.alpha * dv[i]);
    }

    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        for (double& v : x.values()) v = 0.0;
        rel_residual = 0.0;
        return 0;
    }

    ScalarField r = b - apply(x);
    ScalarField z = r;
    {
        auto zv = z.values();
        const auto dv = diag.values();
        for (std::size_t i = 0; i < zv.size(); ++i) zv[i] *= dv[i];
    }
    ScalarField p = z;
    double rz = dot(r, z);
    int it = 0;
    double res = std::sqrt(dot(r, r)) / bnorm;
    while (res > prm.cg_tol && it < prm.cg_max_iter) {
        ScalarField ap = apply(p);
        const double alpha = rz / dot(p, ap);
        auto xv = x.values();
        auto rv = r.values();
        const auto pv = p.values();
        const auto apv = ap.values();
        for (std::size_t i = 0; i < xv.size(); ++i) {
            xv[i] += alpha * pv[i];
            rv[i] -= alpha * apv[i];
        }
        ++it;
        res = std::sqrt(dot(r, r)) / bnorm;
        if (res <= prm.cg_tol) break;
        auto zv = z.values();
        const auto dv = diag.values();
        for (std::size_t i = 0; i < zv.size(); ++i) zv[i] = rv[i] * dv[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        auto pw = p.values();
        for (std::size_t i = 0; i < pw.size(); ++i) pw[i] = zv[i] + beta * pw[i];
    }
    rel_residual = res;
    if (res > prm.cg_tol) throw ConvergenceError("conjugate gradient did not converge", it, res);
    return it;
}

}  // namespace

double energy_R(const ScalarField& u, Axis axis, int k, int p, double beta) {
    if (p != 1 && p != 2) throw InvalidArgument("power p must be 1 or 2");
    if (beta < 0.0) throw InvalidArgument("beta must be non-negative");
    const ScalarField s = variation(u, axis, k);
    double sum = 0.0;
    if (p == 2) {
        for (double v : s.values()) sum += 0.5 * v * v;
    } else {
        for (double v : s.values()) sum += std::sqrt(v * v + beta * beta) - beta;
    }
    return sum * u.cell_area();
}

ScalarField lag_weights(const ScalarField& v, int q, double eps) {
    if (q != 1 && q != 2) throw InvalidArgument("data variant q must be 1 or 2");
    if (eps < 0.0) throw InvalidArgument("eps must be non-negative");
    ScalarField w = diff(v, Axis::X1, 1);
    for (double& g : w.values()) g = (q == 2 ? g * g : std::abs(g)) + eps;
    return w;
}

ScalarField data_density(const ScalarField& u, const ScalarField& u_ref, double eps, int q) {
    require_same(u, u_ref);
    ScalarField w = lag_weights(u, q, eps);
    auto wv = w.values();
    const auto uv = u.values();
    const auto rv = u_ref.values();
    for (std::size_t i = 0; i < wv.size(); ++i) {
        const double e = uv[i] - rv[i];
        wv[i] = e == 0.0 ? 0.0 : 0.5 * e * e / wv[i];
    }
    return w;
}

namespace {
double integrate(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.cell_area();
}
}  // namespace

double energy_D2(const ScalarField& u, const ScalarField& u_ref, double eps) {
    return integrate(data_density(u, u_ref, eps, 2));
}

double energy_D1(const ScalarField& u, const ScalarField& u_ref, double eps) {
    return integrate(data_density(u, u_ref, eps, 1));
}

double convex_energy(const ScalarField& u, const ScalarField& u_prev, const EnergyParams& prm) {
    require_same(u, u_prev);
    const ScalarField w = lag_weights(u_prev, prm.q, prm.eps);
    double data = 0.0;
    const auto uv = u.values();
    const auto pv = u_prev.values();
    const auto wv = w.values();
    for (std::size_t i = 0; i < uv.size(); ++i) {
        const double e = uv[i] - pv[i];
        data += 0.5 * e * e / wv[i];
    }
    data *= u.cell_area();
    return data + prm.alpha * energy_R(u, prm.axis, prm.k, prm.p, prm.p == 1 ? prm.beta : 0.0);
}

ScalarField convex_step(const ScalarField& u_prev, const EnergyParams& prm, SolveStats* stats) {
    prm.validate();
    require_stencil(u_prev, prm.axis, prm.k);
    require_stencil(u_prev, Axis::X1, 1);
    if (!u_prev.all_finite()) throw InvalidArgument("convex_step input is not finite");

    const ScalarField w = lag_weights(u_prev, prm.q, prm.eps);
    ScalarField b = u_prev;
    {
        auto bv = b.values();
        const auto wv = w.values();
        for (std::size_t i = 0; i < bv.size(); ++i) bv[i] /= wv[i];
    }

    SolveStats local;
    ScalarField x = u_prev;
    if (prm.p == 2) {
        ScalarField ones(u_prev.n1(), u_prev.n2(), u_prev.dx1(), u_prev.dx2());
        for (double& v : ones.values()) v = 1.0;
        local.iterations = solve_spd(w, ones, b, x, prm, local.residual);
        local.outer_iterations = 1;
    } else {
        bool done = false;
        for (int outer = 0; outer < prm.fixed_point_max_iter; ++outer) {
            const ScalarField c = tv_coefficients(x, prm);
            ScalarField next = x;
            local.iterations += solve_spd(w, c, b, next, prm, local.residual);
            ++local.outer_iterations;
            const double change = norm_l2(next - x);
            const double scale = norm_l2(next);
            x = std::move(next);
            if (change <= prm.fixed_point_tol * (scale > 0.0 ? scale : 1.0)) {
                done = true;
                break;
            }
        }
        if (!done)
            throw ConvergenceError("lagged fixed point did not converge", local.outer_iterations,
                                   local.residual);
    }
    if (stats) *stats = local;
    return x;
}

double semi_implicit_residual(const ScalarField& u, const ScalarField& u_prev, const EnergyParams& prm) {
    require_same(u, u_prev);
    const ScalarField w = lag_weights(u_prev, prm.q, prm.eps);
    ScalarField s = variation(u, prm.axis, prm.k);
    if (prm.p == 1)
        for (double& v : s.values()) v = v / std::sqrt(v * v + prm.beta * prm.beta);
    // (-1)^(k-1) d^k(.) is -D_k^T(.) for both orders
    const ScalarField flux = variation_adjoint(s, prm.axis, prm.k);
    ScalarField res(u.n1(), u.n2(), u.dx1(), u.dx2());
    auto rv = res.values();
    const auto uv = u.values();
    const auto pv = u_prev.values();
    const auto wv = w.values();
    const auto fv = flux.values();
    for (std::size_t i = 0; i < rv.size(); ++i) rv[i] = (uv[i] - pv[i]) / prm.alpha + wv[i] * fv[i];
    return norm_l2(res);
}

IterateResult iterate(const ScalarField& u0, const EnergyParams& prm, int m_max, std::optional<double> stop_tol) {
    if (m_max < 1) throw InvalidArgument("m_max must be at least 1");
    prm.validate();
    const double tol = stop_tol ? *stop_tol : 1e-6 * norm_l2(u0);
    const double beta = prm.p == 1 ? prm.beta : 0.0;

    IterateResult out;
    IterTrace& tr = out.trace;
    tr.r0 = energy_R(u0, prm.axis, prm.k, prm.p, beta);
    tr.grad_linf0 = norm_linf(diff(u0, Axis::X1, 1));

    auto exceeds = [](double lhs, double rhs, double scale) {
        return lhs - rhs > kMonotonicitySlack * std::max(std::abs(scale), 1e-300);
    };
    auto violate = [&](int m, std::string check, double excess) {
        tr.violations.push_back({m, std::move(check), excess});
    };

    ScalarField prev = u0;
    double r_prev = tr.r0;
    double c_run = tr.grad_linf0;
    for (int m = 1; m <= m_max; ++m) {
        ScalarField cur = convex_step(prev, prm);
        IterRecord rec;
        rec.m = m;
        rec.fc = convex_energy(cur, prev, prm);
        rec.r = energy_R(cur, prm.axis, prm.k, prm.p, beta);
        rec.du_l2 = norm_l2(cur - prev);
        rec.grad_linf = norm_linf(diff(cur, Axis::X1, 1));

        // Fc(u_m; u_{m-1}) <= alpha R(u_{m-1}) and R(u_m) <= R(u_{m-1})
        const double ar_prev = prm.alpha * r_prev;
        if (exceeds(rec.fc, ar_prev, ar_prev)) violate(m, "Fc(u_m;u_m-1) <= alpha R(u_m-1)", rec.fc - ar_prev);
        if (exceeds(rec.r, r_prev, r_prev)) violate(m, "R non-increasing", rec.r - r_prev);
        if (!tr.records.empty()) {
            const IterRecord& last = tr.records.back();
            if (exceeds(rec.fc, last.fc, last.fc)) violate(m, "Fc non-increasing", rec.fc - last.fc);
            // decay bound for the previous step, needs Fc_m
            const double cap = prm.q == 2 ? c_run * c_run : c_run;
            const double lhs = last.du_l2 * last.du_l2 / (2.0 * (cap + prm.eps));
            const double rhs = last.fc - rec.fc;
            if (exceeds(lhs, rhs, last.fc)) violate(last.m, "decay bound", lhs - rhs);
        }
        c_run = std::max(c_run, rec.grad_linf);
        r_prev = rec.r;
        tr.records.push_back(rec);
        prev = std::move(cur);
        if (rec.du_l2 <= tol) break;
    }
    out.u = std::move(prev);
    return out;
}

}  // namespace dispflow
