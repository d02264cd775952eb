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

#include "fixtures.hpp"

namespace {

using namespace ecoserv;

// Full reference scene at several target counts.
void BM_SnicReference(benchmark::State& state) {
  const Raster& image = bench::reference_scene().image;
  SnicParams p;
  p.k = static_cast<int>(state.range(0));
  std::size_t k_actual = 0;
  for (auto _ : state) {
    auto seg = segment(image, p);
    k_actual = seg.segment_count();
    benchmark::DoNotOptimize(seg.labels.data());
  }
  state.counters["segments"] = static_cast<double>(k_actual);
  state.SetItemsProcessed(state.iterations() * image.width * image.height);
}
BENCHMARK(BM_SnicReference)->Arg(500)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

// Square crops of the reference scene, fixed seed spacing.
void BM_SnicSize(benchmark::State& state) {
  const Raster& full = bench::reference_scene().image;
  const int n = static_cast<int>(state.range(0));
  Raster crop(n, n, full.bands);
  for (int b = 0; b < full.bands; ++b)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) crop.at(b, x, y) = full.at(b, x, y);
  SnicParams p;
  p.k = n * n / 52;
  for (auto _ : state) benchmark::DoNotOptimize(segment(crop, p).labels.data());
  state.SetComplexityN(static_cast<std::int64_t>(n) * n);
}
BENCHMARK(BM_SnicSize)->RangeMultiplier(2)->Range(64, 512)->Complexity()->Unit(benchmark::kMillisecond);

}  // namespace
