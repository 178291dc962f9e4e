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

#ifndef VITAL_MIXER_HEAD_H_
#define VITAL_MIXER_HEAD_H_

#include <random>
#include <span>

#include "vital/parameter_store.h"
#include "vital/tensor.h"

namespace vital {

// Feature mixing across the variable axis and dimension mixing across the
// embedding axis, each a pre-LayerNorm residual MLP with GELU and hidden width
// twice its axis. The second layer of each MLP starts at zero, so the initial
// mix is the identity.
//
// Fusion flattens the mixed [N,S] matrix row-major, appends demographics and
// projects to S. The classifier emits one logit for two classes and C logits
// otherwise.
class MixerHead {
 public:
  MixerHead(std::size_t num_variables, std::size_t embed_dim, std::size_t demo_dim,
            int num_classes);

  std::size_t num_variables() const { return n_; }
  std::size_t num_outputs() const { return num_classes_ == 2 ? 1 : num_classes_; }
  void init(ParameterStore& store, std::mt19937_64& rng) const;

  Tensor mix(const ParameterStore& store, const Tensor& h) const;
  Tensor fuse(const ParameterStore& store, const Tensor& mixed,
              std::span<const double> demographics) const;
  Tensor classify(const ParameterStore& store, const Tensor& o) const;
  // Sigmoid cross-entropy with pos_weight on the positive term (two classes)
  // or softmax cross-entropy. Rank-0 result.
  Tensor loss(const Tensor& logits, int label, double pos_weight = 1.0) const;

 private:
  std::size_t n_;
  std::size_t s_;
  std::size_t demo_dim_;
  std::size_t num_classes_;
};

// Mean of per-sample rank-0 losses.
Tensor batch_loss(std::span<const Tensor> losses);

}  // namespace vital

#endif  // VITAL_MIXER_HEAD_H_
