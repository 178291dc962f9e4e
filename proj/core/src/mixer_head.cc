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

#include "vital/mixer_head.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "vital/ops.h"

namespace vital {

namespace {

Tensor normal_tensor(Shape shape, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(num_elements(shape));
  for (double& x : v) x = dist(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

}  // namespace

MixerHead::MixerHead(std::size_t num_variables, std::size_t embed_dim, std::size_t demo_dim,
                     int num_classes)
    : n_(num_variables), s_(embed_dim), demo_dim_(demo_dim),
      num_classes_(static_cast<std::size_t>(num_classes)) {
  if (num_variables == 0) throw std::invalid_argument("mixer needs at least one variable");
  if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
}

void MixerHead::init(ParameterStore& store, std::mt19937_64& rng) const {
  const auto inv_sqrt = [](std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); };
  store.add("mixer.feat.ln.g", Tensor::full({s_}, 1.0), false);
  store.add("mixer.feat.ln.b", Tensor::zeros({s_}), false);
  store.add("mixer.feat.w1", normal_tensor({n_, 2 * n_}, inv_sqrt(n_), rng), false);
  store.add("mixer.feat.b1", Tensor::zeros({2 * n_}), false);
  store.add("mixer.feat.w2", Tensor::zeros({2 * n_, n_}), false);
  store.add("mixer.feat.b2", Tensor::zeros({n_}), false);
  store.add("mixer.dim.ln.g", Tensor::full({s_}, 1.0), false);
  store.add("mixer.dim.ln.b", Tensor::zeros({s_}), false);
  store.add("mixer.dim.w1", normal_tensor({s_, 2 * s_}, inv_sqrt(s_), rng), false);
  store.add("mixer.dim.b1", Tensor::zeros({2 * s_}), false);
  store.add("mixer.dim.w2", Tensor::zeros({2 * s_, s_}), false);
  store.add("mixer.dim.b2", Tensor::zeros({s_}), false);
  const std::size_t fan_in = n_ * s_ + demo_dim_;
  store.add("head.fuse.w", normal_tensor({fan_in, s_}, inv_sqrt(fan_in), rng), false);
  store.add("head.fuse.b", Tensor::zeros({s_}), false);
  store.add("head.cls.w", normal_tensor({s_, num_outputs()}, inv_sqrt(s_), rng), false);
  store.add("head.cls.b", Tensor::zeros({num_outputs()}), false);
}

Tensor MixerHead::mix(const ParameterStore& store, const Tensor& h) const {
  if (h.rank() != 2 || h.dim(0) != n_ || h.dim(1) != s_) {
    throw ShapeError("mixer input " + shape_to_string(h.shape()) + " does not match " +
                     shape_to_string({n_, s_}));
  }
  const Tensor fn = ops::layer_norm(h, store.get("mixer.feat.ln.g"), store.get("mixer.feat.ln.b"));
  Tensor f = ops::add(ops::matmul(ops::transpose(fn), store.get("mixer.feat.w1")),
                      store.get("mixer.feat.b1"));
  f = ops::add(ops::matmul(ops::gelu(f), store.get("mixer.feat.w2")), store.get("mixer.feat.b2"));
  const Tensor x1 = ops::add(h, ops::transpose(f));

  const Tensor dn = ops::layer_norm(x1, store.get("mixer.dim.ln.g"), store.get("mixer.dim.ln.b"));
  Tensor g = ops::add(ops::matmul(dn, store.get("mixer.dim.w1")), store.get("mixer.dim.b1"));
  g = ops::add(ops::matmul(ops::gelu(g), store.get("mixer.dim.w2")), store.get("mixer.dim.b2"));
  return ops::add(x1, g);
}

Tensor MixerHead::fuse(const ParameterStore& store, const Tensor& mixed,
                       std::span<const double> demographics) const {
  if (demographics.size() != demo_dim_) {
    throw ShapeError("demographics of length " + std::to_string(demographics.size()) +
                     " where " + std::to_string(demo_dim_) + " expected");
  }
  Tensor flat = ops::reshape(mixed, {1, n_ * s_});
  if (demo_dim_ > 0) {
    const Tensor demo = Tensor::from({1, demo_dim_}, {demographics.begin(), demographics.end()});
    flat = ops::concat({flat, demo}, 1);
  }
  const Tensor o = ops::add(ops::matmul(flat, store.get("head.fuse.w")), store.get("head.fuse.b"));
  return ops::reshape(o, {s_});
}

Tensor MixerHead::classify(const ParameterStore& store, const Tensor& o) const {
  const Tensor logits = ops::add(ops::matmul(ops::reshape(o, {1, s_}), store.get("head.cls.w")),
                                 store.get("head.cls.b"));
  return ops::reshape(logits, {num_outputs()});
}

Tensor MixerHead::loss(const Tensor& logits, int label, double pos_weight) const {
  if (label < 0 || static_cast<std::size_t>(label) >= num_classes_) {
    throw std::invalid_argument("label " + std::to_string(label) + " outside [0, " +
                                std::to_string(num_classes_) + ")");
  }
  if (num_classes_ == 2) {
    const double target[] = {static_cast<double>(label)};
    return ops::mean(ops::binary_cross_entropy_with_logits(logits, target, pos_weight));
  }
  return ops::softmax_cross_entropy(logits, static_cast<std::size_t>(label));
}

Tensor batch_loss(std::span<const Tensor> losses) {
  if (losses.empty()) throw std::invalid_argument("batch_loss of an empty batch");
  std::vector<Tensor> flat;
  for (const auto& l : losses) flat.push_back(ops::reshape(l, {1}));
  return ops::mean(ops::concat(flat, 0));
}

}  // namespace vital
