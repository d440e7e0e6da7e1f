// Copyright 2026 The lungcadx Authors
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

#include "lungcadx/boosting.hpp"
#include "lungcadx/svm.hpp"

namespace {

struct Data {
  lungcadx::Matrix x;
  std::vector<int> y;
};

Data random_data(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  Data out{lungcadx::Matrix(n, d), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) out.x(i, f) = u(rng);
    out.y[i] = out.x(i, 0) + 0.2 * u(rng) > 0.6;
  }
  return out;
}

void BM_TrainGbt(benchmark::State& state) {
  const auto d = random_data(98, 126);
  lungcadx::GbtParams p;
  p.max_depth = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(lungcadx::train_gbt(d.x, d.y, p));
  }
}
BENCHMARK(BM_TrainGbt)->Arg(1)->Arg(6)->Arg(13)->Unit(benchmark::kMillisecond);

void BM_TrainSvm(benchmark::State& state) {
  const auto d = random_data(98, 126);
  lungcadx::SvmParams p;
  p.c = static_cast<double>(state.range(0));
  p.gamma_rbf = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lungcadx::train_svm(d.x, d.y, p));
  }
}
BENCHMARK(BM_TrainSvm)->Arg(1)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
