// Copyright 2026 The lrnkit Authors.
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

#include "lrnkit/cells.hpp"
#include "lrnkit/matrix.hpp"
#include "lrnkit/rng.hpp"

namespace {

using namespace lrn;

constexpr std::size_t kLength = 128;

struct Fixture {
  BasicCellParams<float> params;
  MatrixF inputs;
};

Fixture make(CellKind kind, std::size_t d) {
  Rng rng(1);
  Fixture f;
  f.params = CellParams::initialize(kind, Activation::tanh, d, d, rng).cast<float>();
  f.inputs = random_normal<float>(kLength, d, rng);
  return f;
}

template <bool Fused>
void BM_Forward(benchmark::State& state) {
  const auto kind = static_cast<CellKind>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const Fixture f = make(kind, d);
  for (auto _ : state) {
    auto traj = Fused ? forward_sequence(f.params, f.inputs) : forward_sequence_naive(f.params, f.inputs);
    benchmark::DoNotOptimize(traj.h.values().data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kLength));
  state.SetLabel(std::string(to_string(kind)));
}

void BM_Backward(benchmark::State& state) {
  const auto kind = static_cast<CellKind>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const Fixture f = make(kind, d);
  const auto traj = forward_sequence(f.params, f.inputs);
  const MatrixF dH(kLength, d, 1.0f);
  for (auto _ : state) {
    auto grads = backward_sequence(f.params, traj, dH);
    benchmark::DoNotOptimize(grads.dx.values().data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kLength));
  state.SetLabel(std::string(to_string(kind)));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const MatrixF a = random_normal<float>(n, n, rng), b = random_normal<float>(n, n, rng);
  for (auto _ : state) {
    auto c = matmul(a, b);
    benchmark::DoNotOptimize(c.values().data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * 2 * n * n * n));
}

void BM_LayerNormRows(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const MatrixF x = random_normal<float>(kLength, d, rng);
  const MatrixF gain(1, d, 1.0f), bias(1, d);
  for (auto _ : state) {
    auto y = layer_norm_rows(x, gain, bias);
    benchmark::DoNotOptimize(y.values().data());
  }
}

void kinds_and_sizes(benchmark::internal::Benchmark* b) {
  for (CellKind kind : kAllCellKinds) {
    for (int d : {64, 256}) b->Args({static_cast<int64_t>(kind), d});
  }
}

BENCHMARK(BM_Forward<true>)->Name("forward/fused")->Apply(kinds_and_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Forward<false>)->Name("forward/naive")->Apply(kinds_and_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Backward)->Name("backward")->Apply(kinds_and_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LayerNormRows)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
