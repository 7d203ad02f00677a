// Copyright 2026 The snakeopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <memory>
#include <random>
#include <vector>

#include "snakeopt/estimator.hpp"
#include "snakeopt/genmodel.hpp"
#include "snakeopt/snake.hpp"
#include "snakeopt/topology.hpp"

namespace {

using namespace snakeopt;

struct Instance {
  Estimator estimator;
  std::vector<Interval> bounds;
  std::vector<double> config;
};

const Instance& sycamore() {
  static const Instance inst = [] {
    GenerativeSpec spec;
    spec.seed = 1;
    auto data = std::make_shared<const CharacterizationData>(
        generate_processor(spec, sycamore_like_68()));
    Instance i{build_estimator(data, kAllMechanisms, WeightTable::defaults(), true), {}, {}};
    i.bounds = hard_bounds(*data, i.estimator.graph());
    std::mt19937_64 rng(1);
    for (const auto& b : i.bounds) {
      std::uniform_int_distribution<std::int64_t> u(0, b.points() - 1);
      i.config.push_back(b.at(u(rng)));
    }
    return i;
  }();
  return inst;
}

void BM_EvaluateSerial(benchmark::State& state) {
  const Instance& i = sycamore();
  for (auto _ : state) benchmark::DoNotOptimize(i.estimator.evaluate_serial(i.config));
  state.counters["components"] = static_cast<double>(i.estimator.components().size());
}
BENCHMARK(BM_EvaluateSerial)->Unit(benchmark::kMicrosecond);

void BM_EvaluateOpenMP(benchmark::State& state) {
  const Instance& i = sycamore();
  const int previous = omp_get_max_threads();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(i.estimator.evaluate(i.config));
  omp_set_num_threads(previous);
}
BENCHMARK(BM_EvaluateOpenMP)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond)->UseRealTime();

void BM_IncrementalSingleVariable(benchmark::State& state) {
  const Instance& i = sycamore();
  std::vector<double> f = i.config;
  IncrementalEvaluator inc(i.estimator, f);
  inc.set_stale_check(false);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<VarId> pick(0, static_cast<VarId>(f.size()) - 1);
  for (auto _ : state) {
    const VarId v = pick(rng);
    f[v] = i.bounds[v].at(static_cast<std::int64_t>(rng() % i.bounds[v].points()));
    benchmark::DoNotOptimize(inc.evaluate_delta(f, {v}));
  }
}
BENCHMARK(BM_IncrementalSingleVariable)->Unit(benchmark::kMicrosecond);

void BM_MultiStartSnake(benchmark::State& state) {
  GenerativeSpec spec;
  spec.seed = 2;
  auto data = std::make_shared<const CharacterizationData>(
      generate_processor(spec, build_surface_code_lattice(3)));
  const Estimator e = build_estimator(data, kAllMechanisms, WeightTable::defaults());
  const auto bounds = hard_bounds(*data, e.graph());
  SnakeParams p;
  p.seeds = 4;
  p.solver.budget = 500;
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(optimize(e, bounds, p, parallel).energy);
}
BENCHMARK(BM_MultiStartSnake)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)
    ->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
