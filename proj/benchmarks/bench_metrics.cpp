/*
 * Copyright 2026 The adlab Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "adlab/eval.hpp"

namespace {

struct Instance {
  std::vector<double> scores;
  std::vector<int> labels;
};

Instance make_instance(std::size_t n, bool ties) {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance in;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = u(gen);
    in.scores.push_back(ties ? std::round(s * 20.0) / 20.0 : s);
    in.labels.push_back(u(gen) < 0.1 ? 1 : 0);
  }
  in.labels[0] = 1;
  in.labels[1] = 0;
  return in;
}

void BM_Auroc(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)), state.range(1) != 0);
  for (auto _ : state) benchmark::DoNotOptimize(adlab::auroc(in.scores, in.labels));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auroc)->ArgsProduct({{1000, 10000, 100000}, {0, 1}});

void BM_Auprc(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)), state.range(1) != 0);
  for (auto _ : state) benchmark::DoNotOptimize(adlab::auprc(in.scores, in.labels));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auprc)->ArgsProduct({{1000, 10000, 100000}, {0, 1}});

}  // namespace

BENCHMARK_MAIN();
