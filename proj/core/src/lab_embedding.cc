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

#include "vital/lab_embedding.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vital/ops.h"

namespace vital {

namespace {

constexpr double kStatsInitStd = 0.25;
constexpr double kIdInitStd = 0.1;

}  // namespace

NotMeasuredMode parse_not_measured_mode(const std::string& text) {
  if (text == "trainable") return NotMeasuredMode::kTrainable;
  if (text == "zero") return NotMeasuredMode::kZero;
  if (text == "random") return NotMeasuredMode::kRandom;
  throw std::invalid_argument("unknown not-measured mode '" + text +
                              "' (expected trainable, zero or random)");
}

std::string to_string(NotMeasuredMode mode) {
  switch (mode) {
    case NotMeasuredMode::kTrainable: return "trainable";
    case NotMeasuredMode::kZero: return "zero";
    case NotMeasuredMode::kRandom: return "random";
  }
  return "trainable";
}

LabStats representative_stats(std::span<const double> observed) {
  if (observed.empty()) {
    throw std::invalid_argument("representative_stats needs at least one observation");
  }
  std::vector<double> v(observed.begin(), observed.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  LabStats s;
  s.min = v.front();
  s.max = v.back();
  s.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  // Summation error can push the mean a hair outside [min, max].
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

LabEmbedding::LabEmbedding(std::size_t num_labs, std::size_t embed_dim, NotMeasuredMode mode)
    : num_labs_(num_labs), embed_dim_(embed_dim), mode_(mode) {
  if (embed_dim == 0) throw std::invalid_argument("embed_dim must be positive");
}

void LabEmbedding::init(ParameterStore& store, std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(4 * embed_dim_);
  for (double& x : w) x = kStatsInitStd * normal(rng);
  store.add("lab.w_stats", Tensor::from({4, embed_dim_}, std::move(w)), false);
  store.add("lab.b_stats", Tensor::zeros({embed_dim_}), false);
  if (num_labs_ > 0) {
    std::vector<double> id(num_labs_ * embed_dim_);
    for (double& x : id) x = kIdInitStd * normal(rng);
    store.add("lab.id", Tensor::from({num_labs_, embed_dim_}, std::move(id)), false);
  }
  // Drawn in every mode so the remaining init stream does not depend on it.
  std::vector<double> token(embed_dim_);
  for (double& x : token) x = normal(rng);
  if (mode_ == NotMeasuredMode::kZero) std::fill(token.begin(), token.end(), 0.0);
  store.add("lab.nm_token", Tensor::from({embed_dim_}, std::move(token)),
            mode_ != NotMeasuredMode::kTrainable);
}

Tensor LabEmbedding::embed_lab(const ParameterStore& store, std::size_t lab,
                               const std::optional<LabStats>& stats) const {
  if (lab >= num_labs_) {
    throw std::out_of_range("lab index " + std::to_string(lab) + " outside " +
                            std::to_string(num_labs_) + " labs");
  }
  const Tensor& token = store.get("lab.nm_token");
  if (!stats) return ops::reshape(token, {embed_dim_});
  const Tensor s = Tensor::from({1, 4}, {stats->min, stats->max, stats->median, stats->mean});
  const std::size_t idx[] = {lab};
  const Tensor out = ops::add(
      ops::add(ops::matmul(s, store.get("lab.w_stats")), store.get("lab.b_stats")),
      ops::embedding_gather(store.get("lab.id"), idx));
  return ops::reshape(out, {embed_dim_});
}

std::optional<Tensor> LabEmbedding::embed(
    const ParameterStore& store, const std::vector<std::optional<LabStats>>& stats) const {
  if (stats.size() != num_labs_) {
    throw ShapeError("expected stats for " + std::to_string(num_labs_) + " labs, got " +
                     std::to_string(stats.size()));
  }
  if (num_labs_ == 0) return std::nullopt;
  std::vector<std::size_t> measured;
  std::vector<double> rows;
  for (std::size_t l = 0; l < num_labs_; ++l) {
    if (!stats[l]) continue;
    measured.push_back(l);
    rows.insert(rows.end(), {stats[l]->min, stats[l]->max, stats[l]->median, stats[l]->mean});
  }
  const Tensor token = ops::reshape(store.get("lab.nm_token"), {1, embed_dim_});
  Tensor table = token;
  if (!measured.empty()) {
    const Tensor s = Tensor::from({measured.size(), 4}, std::move(rows));
    const Tensor enc = ops::add(
        ops::add(ops::matmul(s, store.get("lab.w_stats")), store.get("lab.b_stats")),
        ops::embedding_gather(store.get("lab.id"), measured));
    table = ops::concat({enc, token}, 0);
  }
  std::vector<std::size_t> order(num_labs_);
  for (std::size_t l = 0, m = 0; l < num_labs_; ++l) {
    order[l] = stats[l] ? m++ : measured.size();
  }
  return ops::embedding_gather(table, order);
}

}  // namespace vital
