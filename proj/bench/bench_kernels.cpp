// Copyright 2026 The liftguard Authors
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

// Serial reference vs OpenMP kernels on the lifted UAS plant.

#include "liftguard/identify.hpp"
#include "liftguard/kernels.hpp"
#include "liftguard/uas.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace liftguard;

namespace {

const UasScenario& scenario() {
  static const UasScenario s = uas_scenario();
  return s;
}

kernels::Exec exec_of(const benchmark::State& st) {
  return st.range(0) ? kernels::Exec::parallel : kernels::Exec::serial;
}

void BM_ImpulseNorms(benchmark::State& st) {
  const DeviationSystem sys = deviation_system(scenario().lifted_plant, "gps");
  for (auto _ : st) {
    benchmark::DoNotOptimize(kernels::impulse_norms(sys.a, sys.c, sys.b_w, sys.d_w, 400, exec_of(st)));
  }
}

void BM_WindowResiduals(benchmark::State& st) {
  const LiftedPlant& plant = scenario().lifted_plant;
  const ResidualBank bank = build_residual_bank(plant, {"1"}, {{"1", 1.0}});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<Vector> outputs(600, Vector(plant.output_dim()));
  for (auto& y : outputs)
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = g(rng);
  const int count = static_cast<int>(outputs.size()) - bank.window + 1;
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        kernels::window_residuals(bank.modes[0].range_basis, outputs, bank.window, 0, count, exec_of(st)));
  }
}

void BM_NoiseRuns(benchmark::State& st) {
  const DeviationSystem sys = deviation_system(scenario().lifted_plant, "gps");
  for (auto _ : st) benchmark::DoNotOptimize(kernels::noise_runs(sys, 100, 200, 11, 1.0, exec_of(st)));
}

void BM_StealthSearch(benchmark::State& st) {
  const DeviationSystem sys = deviation_system(scenario().lifted_plant, "gps");
  const Friend fr = compute_friend(max_output_nulling(sys.a, sys.b, sys.c, sys.d), sys.a, sys.b, sys.c, sys.d);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::stealth_search(sys, fr, 200, 20, 20, 5, exec_of(st)));
}

}  // namespace

BENCHMARK(BM_ImpulseNorms)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_WindowResiduals)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_NoiseRuns)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_StealthSearch)->Arg(0)->Arg(1)->ArgName("parallel");

BENCHMARK_MAIN();
