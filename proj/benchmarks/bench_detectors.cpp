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

#include <random>

#include "adlab/detectors.hpp"

namespace {

adlab::Matrix gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  adlab::Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) m(i, j) = g(gen);
  }
  return m;
}

// range(0) = training rows, range(1) = dimension. Scores 500 test rows.
template <adlab::DetectorKind Kind>
void BM_FitScore(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto train = gaussian(n, d, 1);
  const auto test = gaussian(500, d, 2);
  adlab::DetectorParams params;
  params.ae.epochs = 5;
  for (auto _ : state) {
    const auto f = adlab::fit(Kind, train, params, 42);
    benchmark::DoNotOptimize(f.score(test));
  }
}

BENCHMARK(BM_FitScore<adlab::DetectorKind::kEcod>)->Args({1000, 64})->Args({5000, 256})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitScore<adlab::DetectorKind::kIForest>)->Args({1000, 64})->Args({5000, 256})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitScore<adlab::DetectorKind::kLof>)->Args({1000, 64})->Args({5000, 256})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitScore<adlab::DetectorKind::kAe>)->Args({1000, 64})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
