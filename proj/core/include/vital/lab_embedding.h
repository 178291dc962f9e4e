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

#ifndef VITAL_LAB_EMBEDDING_H_
#define VITAL_LAB_EMBEDDING_H_

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vital/parameter_store.h"
#include "vital/tensor.h"

namespace vital {

enum class NotMeasuredMode { kTrainable, kZero, kRandom };

NotMeasuredMode parse_not_measured_mode(const std::string& text);
std::string to_string(NotMeasuredMode mode);

struct LabStats {
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
  double mean = 0.0;
};

// Order-free summary of the observed values; even counts average the two
// middle values. Throws std::invalid_argument on an empty input.
LabStats representative_stats(std::span<const double> observed);

// Measured labs: W_stats^T [min,max,median,mean] + b + ID[l]. Labs never
// measured in the window map to the shared nm_token with no identity term.
//
// Parameters: "lab.w_stats" [4,S], "lab.b_stats" [S], "lab.id" [L,S],
// "lab.nm_token" [S]. The token is frozen in zero and random modes.
class LabEmbedding {
 public:
  LabEmbedding(std::size_t num_labs, std::size_t embed_dim, NotMeasuredMode mode);

  std::size_t num_labs() const { return num_labs_; }
  NotMeasuredMode mode() const { return mode_; }
  void init(ParameterStore& store, std::mt19937_64& rng) const;

  Tensor embed_lab(const ParameterStore& store, std::size_t lab,
                   const std::optional<LabStats>& stats) const;
  // H_l [L,S] in partition order. Empty when L = 0.
  std::optional<Tensor> embed(const ParameterStore& store,
                              const std::vector<std::optional<LabStats>>& stats) const;

 private:
  std::size_t num_labs_;
  std::size_t embed_dim_;
  NotMeasuredMode mode_;
};

}  // namespace vital

#endif  // VITAL_LAB_EMBEDDING_H_
