// Copyright 2026 The Viva Authors.
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

#include <random>

#include "viva/reliability.hpp"

namespace {

viva::RatingMatrix random_matrix(int units, int raters, int hi) {
  std::mt19937 rng(static_cast<unsigned>(units * 31 + raters));
  std::uniform_int_distribution<int> value(0, hi);
  std::bernoulli_distribution missing(0.1);
  viva::RatingMatrix m({}, {}, 0, hi);
  for (int u = 0; u < units; ++u) {
    for (int r = 0; r < raters; ++r) {
      if (!missing(rng)) m.set("u" + std::to_string(u), "r" + std::to_string(r), value(rng));
    }
  }
  return m;
}

void BM_AlphaOrdinal(benchmark::State& state) {
  const auto m = random_matrix(static_cast<int>(state.range(0)), 3, 20);
  for (auto _ : state) benchmark::DoNotOptimize(viva::krippendorff_alpha(m, viva::DistanceMetric::ordinal));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AlphaOrdinal)->Arg(36)->Arg(180)->Arg(1000);

void BM_AlphaInterval(benchmark::State& state) {
  const auto m = random_matrix(static_cast<int>(state.range(0)), 3, 4);
  for (auto _ : state) benchmark::DoNotOptimize(viva::krippendorff_alpha(m, viva::DistanceMetric::interval));
}
BENCHMARK(BM_AlphaInterval)->Arg(180)->Arg(1000);

void BM_Pearson(benchmark::State& state) {
  std::mt19937 rng(7);
  std::normal_distribution<double> d;
  std::vector<double> x(static_cast<std::size_t>(state.range(0))), y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = d(rng);
    y[i] = 0.3 * x[i] + d(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(viva::pearson_correlation(x, y));
}
BENCHMARK(BM_Pearson)->Arg(36)->Arg(10000);

}  // namespace
