// SPDX-License-Identifier: Apache-2.0
//
// risdiff: generative placement of reconfigurable intelligent surfaces
// Copyright (C) 2026 The risdiff authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "risdiff/channel.hpp"
#include "risdiff/dataset.hpp"
#include "risdiff/diffusion.hpp"
#include "risdiff/geometry.hpp"
#include "risdiff/solver.hpp"
#include "risdiff/tensorkit.hpp"

namespace risdiff {
namespace {

void BM_LosIndicator(benchmark::State& state) {
    const Scenario s = generate_scenario(ScenarioConfig{}, 1);
    const Grid grid = s.grid();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(los_indicator(grid.points[i % grid.size()], s.users[i % s.users.size()], s.obstacles));
        ++i;
    }
}
BENCHMARK(BM_LosIndicator);

void BM_AmplitudeTable(benchmark::State& state) {
    const Scenario s = generate_scenario(ScenarioConfig{}, 2);
    const RadioParams p;
    const auto n_mc = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        AmplitudeTable table(s, p, n_mc, 7);
        benchmark::DoNotOptimize(table.n_draws());
    }
}
BENCHMARK(BM_AmplitudeTable)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Oracle(benchmark::State& state) {
    DatasetConfig dc;
    const ProblemInstance inst = make_instance(generate_scenario(dc.scenario, 3), dc, 5);
    const AmplitudeTable table = inst.amplitude_table();
    for (auto _ : state) {
        benchmark::DoNotOptimize(exhaustive_oracle(inst, table).objective);
    }
}
BENCHMARK(BM_Oracle)->Unit(benchmark::kMillisecond);

void BM_LabelScenario(benchmark::State& state) {
    DatasetConfig dc;
    std::uint64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(label_scenario(generate_scenario(dc.scenario, i), dc, i, i).oracle_objective);
        ++i;
    }
}
BENCHMARK(BM_LabelScenario)->Unit(benchmark::kMillisecond);

DenoiserBatch make_batch(const DenoiserConfig& c, std::size_t n) {
    std::mt19937_64 rng(1);
    std::normal_distribution<float> normal;
    DenoiserBatch b;
    b.resize(n, c);
    for (float& v : b.y_t) v = normal(rng);
    for (float& v : b.cond) v = normal(rng);
    for (std::size_t r = 0; r < n; ++r) {
        b.t[r] = static_cast<float>(1 + r % 20);
        b.present[r] = 1;
    }
    return b;
}

void BM_DenoiserForward(benchmark::State& state) {
    const DenoiserConfig c;
    const DenoiserParams p = init_denoiser(c, 1, false);
    const DenoiserBatch b = make_batch(c, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(denoiser_forward(p, b).data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DenoiserForward)->Arg(1)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_DenoiserForwardBackward(benchmark::State& state) {
    const DenoiserConfig c;
    const DenoiserParams p = init_denoiser(c, 1, false);
    const DenoiserBatch b = make_batch(c, 64);
    const std::vector<float> d_out(64 * c.target_dim, 1.0f);
    DenoiserParams grads = p.zeros_like();
    for (auto _ : state) {
        DenoiserTape tape(p, b);
        tape.backward(d_out, grads);
        benchmark::DoNotOptimize(grads.tensors.front().data.data());
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_DenoiserForwardBackward)->Unit(benchmark::kMicrosecond);

void BM_GeneratePlan(benchmark::State& state) {
    DatasetConfig dc;
    DiffusionModel model;
    model.weights = init_denoiser(DenoiserConfig{}, 1, false);
    model.schedule = default_schedule(20);
    model.train.head = OutputHead::velocity;
    const Scenario s = generate_scenario(dc.scenario, 4);
    const ConstraintSet cs = dc.constraints(s.grid());
    SampleConfig sc;
    sc.omega = 3.0;
    std::uint64_t key = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_plan(model, s, cs, sc, key++).indices.data());
    }
}
BENCHMARK(BM_GeneratePlan)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace risdiff

BENCHMARK_MAIN();
