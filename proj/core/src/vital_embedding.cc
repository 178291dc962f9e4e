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

#include "vital/vital_embedding.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "vital/ops.h"

namespace vital {

namespace {

std::string head_name(std::size_t k, const char* what) {
  return "vital.h" + std::to_string(k) + "." + what;
}

Tensor normal_tensor(Shape shape, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(num_elements(shape));
  for (double& x : v) x = dist(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

}  // namespace

void ReprogrammingConfig::validate(const BackboneConfig& backbone) const {
  if (num_prototypes == 0 || num_prototypes >= backbone.vocab_size) {
    throw std::invalid_argument("num_prototypes must lie in [1, vocab_size)");
  }
  if (num_heads == 0 || head_dim == 0 || embed_dim == 0) {
    throw std::invalid_argument("reprogramming dimensions must be positive");
  }
}

VitalEmbedding::VitalEmbedding(ReprogrammingConfig config, const Backbone* backbone)
    : config_(std::move(config)), backbone_(backbone) {
  config_.validate(backbone_->config());
  set_missing_word(config_.missing_word);
}

void VitalEmbedding::set_missing_word(const std::string& word) {
  backbone_->vocab().index(word);
  config_.missing_word = word;
}

void VitalEmbedding::init(ParameterStore& store, std::mt19937_64& rng) const {
  const std::size_t g = backbone_->config().vocab_size;
  const std::size_t dm = backbone_->config().hidden_dim;
  const std::size_t gp = config_.num_prototypes;
  const std::size_t d = config_.head_dim;
  const std::size_t k = config_.num_heads;
  // Probe scale puts the prototypes at roughly unit scale whatever the table's.
  double ms = 0.0;
  const auto e = backbone_->word_embeddings(store).data();
  for (double v : e) ms += v * v;
  const double rms = std::sqrt(ms / static_cast<double>(e.size()));
  store.add("vital.w_probe",
            normal_tensor({gp, g}, 1.0 / (rms * std::sqrt(static_cast<double>(g))), rng),
            false);
  for (std::size_t h = 0; h < k; ++h) {
    store.add(head_name(h, "w_key"),
              normal_tensor({dm, d}, 1.0 / std::sqrt(static_cast<double>(dm)), rng), false);
    store.add(head_name(h, "w_value"),
              normal_tensor({dm, d}, 1.0 / std::sqrt(static_cast<double>(dm)), rng), false);
  }
  store.add("vital.w_out",
            normal_tensor({d * k, dm}, 1.0 / std::sqrt(static_cast<double>(d * k)), rng),
            false);
  store.add("vital.fc.w",
            normal_tensor({dm, config_.embed_dim}, 1.0 / std::sqrt(static_cast<double>(dm)),
                          rng),
            false);
  store.add("vital.fc.b", Tensor::zeros({config_.embed_dim}), false);
}

Tensor VitalEmbedding::prototypes(const ParameterStore& store) const {
  return ops::matmul(store.get("vital.w_probe"), backbone_->word_embeddings(store));
}

Tensor VitalEmbedding::reprogram(const ParameterStore& store, std::span<const double> x,
                                 std::span<const std::uint8_t> mask,
                                 std::vector<Tensor>* attention) const {
  if (x.size() != mask.size()) {
    throw ShapeError("series of length " + std::to_string(x.size()) +
                     " with mask of length " + std::to_string(mask.size()));
  }
  if (x.empty()) throw std::invalid_argument("cannot reprogram an empty series");
  const std::size_t n = x.size();
  const std::size_t dm = backbone_->config().hidden_dim;
  std::vector<double> masked(n);
  for (std::size_t i = 0; i < n; ++i) masked[i] = mask[i] ? x[i] : 0.0;

  const Tensor protos = prototypes(store);
  const Tensor q = ops::repeat_last_dim(Tensor::from({n}, std::move(masked)), config_.head_dim);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(config_.head_dim));
  std::vector<Tensor> heads;
  if (attention) attention->clear();
  for (std::size_t h = 0; h < config_.num_heads; ++h) {
    const Tensor keys = ops::matmul(protos, store.get(head_name(h, "w_key")));
    const Tensor values = ops::matmul(protos, store.get(head_name(h, "w_value")));
    const Tensor a = ops::softmax_last_axis(
        ops::scale(ops::matmul(q, ops::transpose(keys)), inv_sqrt_d));
    if (attention) attention->push_back(a);
    heads.push_back(ops::matmul(a, values));
  }
  const Tensor z = ops::matmul(ops::concat(heads, 1), store.get("vital.w_out"));

  std::vector<double> keep(n * dm), fill(n * dm);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = mask[i] ? 1.0 : 0.0;
    std::fill_n(keep.begin() + static_cast<std::ptrdiff_t>(i * dm), dm, m);
    std::fill_n(fill.begin() + static_cast<std::ptrdiff_t>(i * dm), dm, 1.0 - m);
  }
  const Tensor missing = backbone_->word_rows(store, config_.missing_word, n);
  return ops::add(ops::mul(z, Tensor::from({n, dm}, std::move(keep))),
                  ops::mul(missing, Tensor::from({n, dm}, std::move(fill))));
}

Tensor VitalEmbedding::reprogram_series(const ParameterStore& store,
                                        std::span<const double> x,
                                        std::span<const std::uint8_t> mask) const {
  return reprogram(store, x, mask);
}

std::optional<Tensor> VitalEmbedding::embed(const ParameterStore& store,
                                            std::span<const double> x,
                                            std::span<const std::uint8_t> mask,
                                            std::size_t num_series) const {
  if (num_series == 0) return std::nullopt;
  if (x.size() % num_series != 0) {
    throw ShapeError("cannot split " + std::to_string(x.size()) + " steps into " +
                     std::to_string(num_series) + " series");
  }
  const Tensor z = reprogram(store, x, mask);
  const Tensor last = backbone_->forward_sequences(store, z, num_series, true);
  return ops::add(ops::matmul(last, store.get("vital.fc.w")), store.get("vital.fc.b"));
}

std::vector<std::vector<double>> VitalEmbedding::attention_map(
    const ParameterStore& store, std::span<const double> x,
    std::span<const std::uint8_t> mask) const {
  std::vector<Tensor> heads;
  reprogram(store, x, mask, &heads);
  const std::size_t gp = config_.num_prototypes;
  std::vector<std::vector<double>> out(x.size(), std::vector<double>(gp, 0.0));
  const double w = 1.0 / static_cast<double>(heads.size());
  for (const auto& a : heads) {
    const auto v = a.data();
    for (std::size_t t = 0; t < x.size(); ++t)
      for (std::size_t g = 0; g < gp; ++g) out[t][g] += w * v[t * gp + g];
  }
  return out;
}

void write_attention_csv(const std::vector<std::vector<double>>& attention,
                         std::span<const std::uint8_t> mask,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::size_t gp = attention.empty() ? 0 : attention[0].size();
  out << "step,missing";
  for (std::size_t g = 0; g < gp; ++g) out << ',' << g;
  out << '\n' << std::setprecision(17);
  for (std::size_t t = 0; t < attention.size(); ++t) {
    out << t << ',' << (mask[t] ? 0 : 1);
    for (double v : attention[t]) out << ',' << v;
    out << '\n';
  }
}

}  // namespace vital
