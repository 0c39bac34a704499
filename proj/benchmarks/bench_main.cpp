// Copyright 2026 The mlsreenact Authors.
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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mlsr/attention.hpp"
#include "mlsr/mls.hpp"
#include "mlsr/warp.hpp"

namespace {

using namespace mlsr;

PairedPointSet sample_pairs(std::size_t n) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::vector<Point2> src, drv;
  for (std::size_t i = 0; i < n; ++i) {
    drv.push_back({u(rng), u(rng)});
    src.push_back({u(rng), u(rng)});
  }
  return PairedPointSet(src, drv);
}

void BM_DenseFlow(benchmark::State& state) {
  const PairedPointSet pairs = sample_pairs(10);
  const int side = static_cast<int>(state.range(0));
  const ParallelOptions par{static_cast<int>(state.range(1))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(dense_flow(pairs, MlsConfig{}, side, side, std::nullopt, par));
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_DenseFlow)->Args({64, 1})->Args({256, 1})->Args({256, 2})->Args({256, 8})
    ->Unit(benchmark::kMillisecond);

void BM_BackwardWarp(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  ImageBuffer img(side, side, 3, 0.5f);
  const FlowField flow = dense_flow(sample_pairs(10), MlsConfig{}, side, side);
  const ParallelOptions par{static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(backward_warp(img, flow, par));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_BackwardWarp)->Args({256, 1})->Args({256, 8})->Unit(benchmark::kMillisecond);

void BM_PairTransform(benchmark::State& state) {
  const WeightBundle w = WeightBundle::stub(7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix ls(kDefaultFeaturePoints, kEmbeddingDim), ld(kDefaultFeaturePoints, kEmbeddingDim);
  for (Eigen::Index i = 0; i < ls.size(); ++i) {
    ls.data()[i] = u(rng);
    ld.data()[i] = u(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(pair_transform(ls, ld, w));
}
BENCHMARK(BM_PairTransform)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
