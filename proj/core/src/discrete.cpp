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

#include "dispflow/discrete.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "dispflow/error.hpp"

namespace dispflow {

namespace {

void require_order(int k) {
    if (k != 1 && k != 2) throw InvalidArgument("difference order must be 1 or 2");
}

long clamp_index(long j, long n) { return std::clamp(j, 0L, n - 1); }

// Candidate s beats the incumbent on ties when |s| is smaller, then when s is negative.
bool tie_better(int s, int incumbent) {
    if (std::abs(s) != std::abs(incumbent)) return std::abs(s) < std::abs(incumbent);
    return s < incumbent;
}

}  // namespace

ScalarField shift_rows(const ScalarField& img, std::span<const int> shifts) {
    if (shifts.size() != img.n2()) throw DimensionError("one shift per row is required");
    ScalarField out(img.n1(), img.n2(), img.dx1(), img.dx2());
    const auto n = static_cast<long>(img.n1());
    for (std::size_t r = 0; r < img.n2(); ++r)
        for (long j = 0; j < n; ++j)
            out(static_cast<std::size_t>(j), r) = img(static_cast<std::size_t>(clamp_index(j - shifts[r], n)), r);
    return out;
}

ScalarField permute_columns(const ScalarField& img, std::span<const std::size_t> perm) {
    if (perm.size() != img.n1()) throw DimensionError("permutation length must equal the column count");
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t p : perm) {
        if (p >= perm.size() || seen[p]) throw InvalidArgument("column map is not a permutation");
        seen[p] = true;
    }
    ScalarField out(img.n1(), img.n2(), img.dx1(), img.dx2());
    for (std::size_t r = 0; r < img.n2(); ++r)
        for (std::size_t j = 0; j < img.n1(); ++j) out(j, r) = img(perm[j], r);
    return out;
}

double row_roughness(const ScalarField& img, int k) {
    require_order(k);
    double acc = 0.0;
    for (std::size_t r = static_cast<std::size_t>(k); r < img.n2(); ++r) {
        for (std::size_t j = 0; j < img.n1(); ++j) {
            const double d = k == 1 ? img(j, r) - img(j, r - 1) : img(j, r) - 2.0 * img(j, r - 1) + img(j, r - 2);
            acc += d * d;
        }
    }
    return acc;
}

double column_roughness(const ScalarField& img, int k) {
    require_order(k);
    double acc = 0.0;
    for (std::size_t r = 0; r < img.n2(); ++r) {
        for (std::size_t j = static_cast<std::size_t>(k); j < img.n1(); ++j) {
            const double d = k == 1 ? img(j, r) - img(j - 1, r) : img(j, r) - 2.0 * img(j - 1, r) + img(j - 2, r);
            acc += d * d;
        }
    }
    return acc;
}

DiscreteResult jitter_correct_rows(const ScalarField& img, int max_shift, int k) {
    require_order(k);
    if (max_shift < 0) throw InvalidArgument("shift bound must be >= 0");
    const auto n = static_cast<long>(img.n1());
    const std::size_t rows = img.n2();
    if (rows < 2 || n < 2) throw DimensionError("jitter correction needs at least a 2 x 2 image");
    if (max_shift >= n) throw InvalidArgument("shift bound must be less than the row length");

    // Shifts relative to row 0 span [-2M, 2M]; corrected rows are tracked
    // with the column range [lo, hi) that holds real (unreplicated) samples.
    // Observed columns [M, n - M) are real whatever the row's displacement.
    const long margin = 2L * max_shift < n ? max_shift : 0;
    const int window = static_cast<int>(std::min<long>(2L * max_shift, n - 1));
    std::vector<int> rel(rows, 0);
    std::vector<long> lo(rows, 0), hi(rows, n);
    std::vector<std::vector<double>> corr(rows, std::vector<double>(static_cast<std::size_t>(n)));
    for (long j = 0; j < n; ++j) corr[0][static_cast<std::size_t>(j)] = img(static_cast<std::size_t>(j), 0);

    for (std::size_t r = 1; r < rows; ++r) {
        const bool second = k == 2 && r >= 2;
        double best = std::numeric_limits<double>::infinity();
        int best_s = 0;
        for (int s = -window; s <= window; ++s) {
            long a = std::max({0L, margin - s, lo[r - 1]});
            long b = std::min({n, n - margin - s, hi[r - 1]});
            if (second) {
                a = std::max(a, lo[r - 2]);
                b = std::min(b, hi[r - 2]);
            }
            if (b <= a) continue;
            double acc = 0.0;
            for (long j = a; j < b; ++j) {
                const auto ju = static_cast<std::size_t>(j);
                const double v = img(static_cast<std::size_t>(j + s), r);
                const double d = second ? v - 2.0 * corr[r - 1][ju] + corr[r - 2][ju] : v - corr[r - 1][ju];
                acc += d * d;
            }
            const double cost = acc / static_cast<double>(b - a);
            if (cost < best || (cost == best && tie_better(s, best_s))) {
                best = cost;
                best_s = s;
            }
        }
        rel[r] = best_s;
        lo[r] = std::max(0L, -static_cast<long>(best_s));
        hi[r] = std::min(n, n - best_s);
        for (long j = 0; j < n; ++j)
            corr[r][static_cast<std::size_t>(j)] = img(static_cast<std::size_t>(clamp_index(j + best_s, n)), r);
    }

    // Fix the gauge so that every displacement fits in [-M, M], preferring
    // the offset closest to zero.
    const auto [mn, mx] = std::minmax_element(rel.begin(), rel.end());
    const int c_lo = *mx - max_shift, c_hi = *mn + max_shift;

    DiscreteResult res;
    res.cost_before = row_roughness(img, k);
    res.shifts.axis = Axis::X1;
    res.shifts.bound = max_shift;
    res.shifts.shifts.assign(rows, 0);
    res.image = img;
    res.cost_after = res.cost_before;
    if (c_lo > c_hi) return res;
    const int c = std::clamp(0, c_lo, c_hi);

    std::vector<int> d(rows), undo(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        d[r] = rel[r] - c;
        undo[r] = -d[r];
    }
    ScalarField corrected = shift_rows(img, undo);
    const double after = row_roughness(corrected, k);
    if (after > res.cost_before) return res;
    res.image = std::move(corrected);
    res.shifts.shifts = std::move(d);
    res.cost_after = after;
    return res;
}

DiscreteResult block_assign_columns(const ScalarField& img, int block, int k) {
    require_order(k);
    const std::size_t n = img.n1();
    if (block < 1) throw InvalidArgument("block width must be >= 1");
    if (static_cast<std::size_t>(block) > n) throw InvalidArgument("block width exceeds the image width");
    const auto m = static_cast<std::size_t>(block);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const auto ku = static_cast<std::size_t>(k);

    // Sum over rows of the squared difference ending at column e (e >= k).
    auto term = [&](std::size_t e) {
        double acc = 0.0;
        for (std::size_t r = 0; r < img.n2(); ++r) {
            const double d = ku == 1 ? img(perm[e], r) - img(perm[e - 1], r)
                                     : img(perm[e], r) - 2.0 * img(perm[e - 1], r) + img(perm[e - 2], r);
            acc += d * d;
        }
        return acc;
    };
    std::vector<std::size_t> ends;
    auto local = [&](std::size_t a, std::size_t b) {
        ends.clear();
        for (std::size_t c : {a, b})
            for (std::size_t e = c; e <= c + ku && e < n; ++e)
                if (e >= ku) ends.push_back(e);
        std::sort(ends.begin(), ends.end());
        ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
        double acc = 0.0;
        for (std::size_t e : ends) acc += term(e);
        return acc;
    };

    const double before = column_roughness(img, k);
    const double tol = 1e-12 * std::max(before, 1.0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t start = 0; start < n; start += m) {
            const std::size_t stop = std::min(n, start + m);
            for (;;) {
                double best = -tol;
                std::size_t bi = 0, bj = 0;
                for (std::size_t i = start; i < stop; ++i) {
                    for (std::size_t j = i + 1; j < stop; ++j) {
                        const double old_cost = local(i, j);
                        std::swap(perm[i], perm[j]);
                        const double delta = local(i, j) - old_cost;
                        std::swap(perm[i], perm[j]);
                        if (delta < best) {
                            best = delta;
                            bi = i;
                            bj = j;
                        }
                    }
                }
                if (best >= -tol) break;
                std::swap(perm[bi], perm[bj]);
                changed = true;
            }
        }
    }

    DiscreteResult res;
    res.image = permute_columns(img, perm);
    res.cost_before = before;
    res.cost_after = column_roughness(res.image, k);
    res.shifts.axis = Axis::X1;
    res.shifts.bound = block - 1;
    res.shifts.shifts.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        res.shifts.shifts[j] = static_cast<int>(perm[j]) - static_cast<int>(j);
    return res;
}

}  // namespace dispflow
