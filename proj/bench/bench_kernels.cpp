// Copyright 2026 The DVD Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference path against the OpenMP path for each kernel. Arg 0 is
// the image side; the label says which path ran.

#include <benchmark/benchmark.h>

#include "dvd/rng.hpp"
#include "dvd/spectral.hpp"
#include "dvd/transforms.hpp"

namespace {

using namespace dvd;

Image noise_image(int side) {
  PhiloxStream rng(2026, 0);
  Image img(side, side);
  for (double& v : img.values()) v = rng.uniform();
  return img;
}

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& state) {
  state.SetLabel(state.range(1) ? "openmp" : "serial");
  state.SetItemsProcessed(state.iterations());
}

void BM_AcuityBlur(benchmark::State& state) {
  const Image img = noise_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_acuity_blur(img, 6.0, exec_of(state)));
  label(state);
}

void BM_ForwardTransform(benchmark::State& state) {
  const Image img = noise_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward_transform(img, exec_of(state)));
  label(state);
}

void BM_ContrastLimit(benchmark::State& state) {
  const Image img = noise_image(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_contrast_limit(img, AgeMonths(24), 0.3, 1e-4, 100, exec_of(state)));
  }
  label(state);
}

void BM_ChromaticFidelity(benchmark::State& state) {
  const Image img = noise_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_chromatic_fidelity(img, 0.4, {}, exec_of(state)));
  label(state);
}

void BM_DvdTransform(benchmark::State& state) {
  const Image img = noise_image(static_cast<int>(state.range(0)));
  const DvdConfig cfg;
  const ScheduleSet& s = ScheduleSet::defaults();
  for (auto _ : state) benchmark::DoNotOptimize(dvd_transform(img, AgeMonths(12), cfg, s, exec_of(state)));
  label(state);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int side : {64, 224, 512}) {
    for (int par : {0, 1}) b->Args({side, par});
  }
  b->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK(BM_AcuityBlur)->Apply(sizes);
BENCHMARK(BM_ForwardTransform)->Apply(sizes);
BENCHMARK(BM_ContrastLimit)->Apply(sizes);
BENCHMARK(BM_ChromaticFidelity)->Apply(sizes);
BENCHMARK(BM_DvdTransform)->Apply(sizes);

BENCHMARK_MAIN();
