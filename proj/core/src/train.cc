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

#include "vital/train.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <thread>

#include "vital/metrics.h"
#include "vital/ops.h"
#include "vital/optimizer.h"

namespace vital {

namespace {

using GradMap = std::unordered_map<std::string, std::vector<double>>;

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct ChunkResult {
  double loss = 0.0;
  GradMap grads;
};

ChunkResult run_chunk(const VitalModel& model, std::span<const ModelInput* const> chunk,
                      double weight, double pos_weight) {
  ParameterStore local = model.parameters().fork();
  Tape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = ops::scale(model.loss_batch(local, chunk, pos_weight), weight);
  }
  tape.backward(loss);
  ChunkResult out;
  out.loss = loss.item();
  for (const auto& e : local.entries()) {
    if (!e.frozen) out.grads.emplace(e.name, e.tensor.grad());
  }
  return out;
}

std::unordered_map<std::string, std::vector<double>> snapshot(const ParameterStore& store) {
  std::unordered_map<std::string, std::vector<double>> out;
  for (const auto& e : store.entries()) {
    if (!e.frozen) out.emplace(e.name, std::vector<double>(e.tensor.data().begin(),
                                                           e.tensor.data().end()));
  }
  return out;
}

void restore(ParameterStore& store,
             const std::unordered_map<std::string, std::vector<double>>& values) {
  for (const auto& [name, v] : values) {
    auto dst = store.get(name).mutable_data();
    std::copy(v.begin(), v.end(), dst.begin());
  }
}

bool has_both_classes(const std::vector<ModelInput>& inputs) {
  bool pos = false, neg = false;
  for (const auto& in : inputs) (in.label == 1 ? pos : neg) = true;
  return pos && neg;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (chunk_size == 0) throw std::invalid_argument("chunk_size must be >= 1");
  if (!(pos_weight > 0.0)) throw std::invalid_argument("pos_weight must be positive");
  if (threads == 0) throw std::invalid_argument("threads must be >= 1");
}

std::vector<double> predict(const VitalModel& model, const std::vector<ModelInput>& inputs,
                            std::size_t threads) {
  constexpr std::size_t kChunk = 4;
  std::vector<const ModelInput*> ptrs;
  for (const auto& in : inputs) ptrs.push_back(&in);
  std::vector<double> scores(inputs.size());
  const std::size_t chunks = (inputs.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t b = c * kChunk;
    const std::size_t n = std::min(kChunk, inputs.size() - b);
    const auto logits =
        model.logits_batch(model.parameters(), std::span(ptrs).subspan(b, n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = logits[i].data();
      if (v.size() == 1) {
        scores[b + i] = v[0];
      } else {
        const double mx = *std::max_element(v.begin(), v.end());
        double denom = 0.0;
        for (double x : v) denom += std::exp(x - mx);
        scores[b + i] = std::exp(v.back() - mx) / denom;
      }
    }
  });
  return scores;
}

SplitMetrics evaluate(const VitalModel& model, const std::vector<ModelInput>& inputs,
                      const std::string& split, std::size_t threads) {
  SplitMetrics m;
  m.split = split;
  m.count = inputs.size();
  const auto scores = predict(model, inputs, threads);
  std::vector<int> labels;
  const int positive = model.layout().num_classes - 1;
  for (const auto& in : inputs) labels.push_back(in.label == positive ? 1 : 0);
  m.positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  m.auroc = auroc(scores, labels);
  m.auprc = auprc(scores, labels);
  return m;
}

TrainResult train(VitalModel& model, const std::vector<ModelInput>& train_set,
                  const std::vector<ModelInput>& validation_set, const TrainConfig& config) {
  config.validate();
  TrainResult result;
  ParameterStore& store = model.parameters();
  result.backbone_before = store.fingerprint(Backbone::kPrefix);
  const bool validate_epochs = !validation_set.empty() && has_both_classes(validation_set);

  Adam adam(AdamConfig{.learning_rate = config.learning_rate});
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  auto best = snapshot(store);
  double best_auroc = -1.0;
  std::size_t since_best = 0;
  bool stop = false;
  for (std::size_t epoch = 1; epoch <= config.epochs && !stop && !train_set.empty(); ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t b0 = 0; b0 < order.size() && !stop; b0 += config.batch_size) {
      const std::size_t bn = std::min(config.batch_size, order.size() - b0);
      std::vector<const ModelInput*> batch;
      for (std::size_t i = 0; i < bn; ++i) batch.push_back(&train_set[order[b0 + i]]);
      const std::size_t chunks = (bn + config.chunk_size - 1) / config.chunk_size;
      std::vector<ChunkResult> parts(chunks);
      try {
        parallel_for(chunks, config.threads, [&](std::size_t c) {
          const std::size_t s = c * config.chunk_size;
          const std::size_t n = std::min(config.chunk_size, bn - s);
          parts[c] = run_chunk(model, std::span(batch).subspan(s, n),
                               static_cast<double>(n) / static_cast<double>(bn),
                               config.pos_weight);
        });
      } catch (const NumericError& e) {
        throw TrainingDiverged(result.steps, e.what());
      }
      GradMap total = std::move(parts[0].grads);
      double batch_loss = parts[0].loss;
      for (std::size_t c = 1; c < chunks; ++c) {
        batch_loss += parts[c].loss;
        for (auto& [name, g] : parts[c].grads) {
          auto& dst = total.at(name);
          for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingDiverged(result.steps, "non-finite loss");
      }
      adam.step(store, total);
      for (const auto& e : store.entries()) {
        if (e.frozen) continue;
        for (double v : e.tensor.data()) {
          if (!std::isfinite(v)) {
            throw TrainingDiverged(result.steps, "parameter " + e.name + " became non-finite");
          }
        }
      }
      ++result.steps;
      loss_sum += batch_loss;
      ++batches;
      if (config.max_steps > 0 && result.steps >= config.max_steps) stop = true;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.step = result.steps;
    rec.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(batches, 1));
    if (validate_epochs) {
      const SplitMetrics m = evaluate(model, validation_set, "validation", config.threads);
      rec.val_auroc = m.auroc;
      rec.val_auprc = m.auprc;
      if (m.auroc > best_auroc) {
        best_auroc = m.auroc;
        result.best_epoch = epoch;
        best = snapshot(store);
        since_best = 0;
      } else if (++since_best >= config.patience) {
        stop = true;
      }
    } else {
      result.best_epoch = epoch;
      best = snapshot(store);
    }
    result.history.push_back(rec);
  }
  restore(store, best);
  result.best_val_auroc = std::max(best_auroc, 0.0);
  result.backbone_after = store.fingerprint(Backbone::kPrefix);
  if (result.backbone_after != result.backbone_before) {
    throw std::logic_error("backbone parameters changed during training");
  }
  return result;
}

void write_history_csv(const std::vector<EpochRecord>& history,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,step,train_loss,val_auroc,val_auprc\n" << std::setprecision(17);
  for (const auto& r : history) {
    out << r.epoch << ',' << r.step << ',' << r.train_loss << ',' << r.val_auroc << ','
        << r.val_auprc << '\n';
  }
}

}  // namespace vital
