/*
 * Copyright 2026 The Vital Authors.
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

#include <optional>
#include <random>
#include <vector>

#include "vital/metrics.h"
#include "vital/model.h"
#include "vital/ops.h"
#include "vital/synthetic.h"

namespace vital {
namespace {

Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Tensor t = Tensor::zeros({r, c});
  for (double& v : t.mutable_data()) v = d(rng);
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const Tensor a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ops::matmul(a, b).data().data());
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

struct Fixture {
  Fixture() {
    SyntheticConfig sc;
    sc.num_patients = 64;
    syn = generate_synthetic(sc);
    const Normalizer norm(*syn.dataset.manifest.normalization);
    inputs = prepare_inputs(syn.dataset, syn.dataset.manifest.splits.train, norm);
    model.emplace(ModelConfig{}, ModelLayout::from_manifest(syn.dataset.manifest), 1);
  }
  SyntheticDataset syn;
  std::vector<ModelInput> inputs;
  std::optional<VitalModel> model;
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_ReprogramSeries(benchmark::State& state) {
  auto& f = fixture();
  const auto& in = f.inputs.front();
  std::span<const double> x(in.vital_values.data(), in.steps);
  std::span<const std::uint8_t> m(in.vital_mask.data(), in.steps);
  for (auto _ : state) {
    Tape tape;
    TapeScope scope(tape);
    benchmark::DoNotOptimize(
        f.model->vital_embedding().reprogram_series(f.model->parameters(), x, m).data().data());
  }
}
BENCHMARK(BM_ReprogramSeries)->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(f.model->score(f.inputs.front()));
}
BENCHMARK(BM_ModelForward)->Unit(benchmark::kMillisecond);

void BM_ModelForwardBackward(benchmark::State& state) {
  auto& f = fixture();
  std::vector<const ModelInput*> batch;
  for (std::size_t i = 0; i < 4; ++i) batch.push_back(&f.inputs[i]);
  for (auto _ : state) {
    ParameterStore store = f.model->parameters().fork();
    Tape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      loss = f.model->loss_batch(store, batch, 1.0);
    }
    tape.backward(loss);
    benchmark::DoNotOptimize(loss.item());
  }
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_ModelForwardBackward)->Unit(benchmark::kMillisecond);

void BM_Auroc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = u(rng);
    y[i] = i % 3 == 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(auroc(s, y) + auprc(s, y));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(100000);

}  // namespace
}  // namespace vital

BENCHMARK_MAIN();
