// Copyright 2026 The Ecoserv Authors
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

#include <vector>

#include "ecoserv/forest.hpp"
#include "fixtures.hpp"

namespace {

using namespace ecoserv;

void BM_TrainForest(benchmark::State& state) {
  const TrainingSet& data = bench::reference_training_set();
  ForestParams p;
  p.n_trees = static_cast<int>(state.range(0));
  const auto threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(data, p, threads).trees.data());
  state.counters["rows"] = static_cast<double>(data.rows());
}
BENCHMARK(BM_TrainForest)
    ->Args({10, 1})
    ->Args({100, 1})
    ->Args({100, 4})
    ->Unit(benchmark::kMillisecond);

// Soft prediction over every reference segment.
void BM_PredictProba(benchmark::State& state) {
  const TrainingSet& data = bench::reference_training_set();
  const FeatureMatrix& f = bench::reference_features();
  ForestParams p;
  p.n_trees = static_cast<int>(state.range(0));
  const ForestModel model = train_forest(data, p);
  std::vector<double> out(model.class_count);
  for (auto _ : state) {
    for (std::size_t r = 0; r < f.rows; ++r) predict_proba(model, f.row(r), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.rows));
}
BENCHMARK(BM_PredictProba)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
