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

#include <benchmark/benchmark.h>

#include <numbers>

#include "dispflow/discrete.hpp"
#include "dispflow/experiment.hpp"
#include "dispflow/flows.hpp"
#include "dispflow/tomo.hpp"
#include "dispflow/varsolve.hpp"

using namespace dispflow;

namespace {

// Arguments are the image size n; sinograms use 90 angles.

void BM_Radon(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ScalarField f = shepp_logan(n);
    const auto th = uniform_angles(90);
    for (auto _ : state) benchmark::DoNotOptimize(radon(f, th));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Radon)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Fbp(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Sinogram s = radon(shepp_logan(n), uniform_angles(90));
    for (auto _ : state) benchmark::DoNotOptimize(fbp(s, n));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Fbp)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond)->Complexity();

void BM_FlowRhs(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ScalarField u = radon(shepp_logan(n), uniform_angles(90)).data;
    FlowParams p;
    p.k = static_cast<int>(state.range(1));
    p.p = 2;
    p.q = 1;
    for (auto _ : state) benchmark::DoNotOptimize(flow_rhs(u, p));
}
BENCHMARK(BM_FlowRhs)->ArgsProduct({{64, 128, 256}, {1, 2}});

void BM_FlowEvolve(benchmark::State& state) {
    const ScalarField u = radon(shepp_logan(128), uniform_angles(90)).data;
    FlowParams p;
    p.q = 1;
    const double t_end = 1e-3 * static_cast<double>(state.range(0));
    std::size_t steps = 0;
    for (auto _ : state) {
        FlowRun r = evolve(u, p, t_end);
        steps = r.state.steps;
        benchmark::DoNotOptimize(r);
    }
    state.counters["steps"] = static_cast<double>(steps);
}
BENCHMARK(BM_FlowEvolve)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ConvexStep(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ScalarField u = make_smooth_image(n, n, 3);
    EnergyParams p;
    p.p = static_cast<int>(state.range(1));
    p.alpha = 1e-3;
    p.beta = 5e-2;
    for (auto _ : state) benchmark::DoNotOptimize(convex_step(u, p));
}
BENCHMARK(BM_ConvexStep)->ArgsProduct({{32, 64, 128}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_JitterCorrect(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const int m = static_cast<int>(state.range(1));
    const ScalarField orig = make_smooth_image(n, n, 5, 4.0, 1.0);
    const ScalarField obs = shift_rows(orig, sample_row_shifts(n, m, 6));
    for (auto _ : state) benchmark::DoNotOptimize(jitter_correct_rows(obs, m, 1));
    state.SetComplexityN(static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n) * m);
}
BENCHMARK(BM_JitterCorrect)->ArgsProduct({{64, 128, 256}, {2, 5, 10}})->Complexity(benchmark::oN);

void BM_BlockAssign(benchmark::State& state) {
    const ScalarField s = radon(shepp_logan(128), uniform_angles(90)).data;
    const int block = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(block_assign_columns(s, block, 1));
}
BENCHMARK(BM_BlockAssign)->Arg(3)->Arg(5)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
