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

#ifndef VITAL_VITAL_EMBEDDING_H_
#define VITAL_VITAL_EMBEDDING_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vital/backbone.h"
#include "vital/parameter_store.h"
#include "vital/tensor.h"

namespace vital {

struct ReprogrammingConfig {
  std::size_t num_prototypes = 100;  // G'
  std::size_t num_heads = 4;         // K
  std::size_t head_dim = 8;          // d
  std::size_t embed_dim = 16;        // S
  std::string missing_word = "Missing";

  void validate(const BackboneConfig& backbone) const;
};

// Cross-attention reprogramming of univariate vital series into the backbone
// embedding space, followed by the frozen backbone and a shared D -> S layer.
//
// Parameters: "vital.w_probe" [G',G], "vital.h{k}.w_key" and
// "vital.h{k}.w_value" [D,d], "vital.w_out" [d*K,D], "vital.fc.w" [D,S],
// "vital.fc.b" [S].
class VitalEmbedding {
 public:
  VitalEmbedding(ReprogrammingConfig config, const Backbone* backbone);

  const ReprogrammingConfig& config() const { return config_; }
  void set_missing_word(const std::string& word);
  void init(ParameterStore& store, std::mt19937_64& rng) const;

  // E' = W_probe E, [G',D].
  Tensor prototypes(const ParameterStore& store) const;

  // Reprograms rows of stacked series. x and mask hold n entries (any number
  // of series back to back); the result is [n,D]. Rows with mask 0 equal the
  // missing word embedding exactly. When attention is given it receives the
  // per-head [n,G'] attention matrices.
  Tensor reprogram(const ParameterStore& store, std::span<const double> x,
                   std::span<const std::uint8_t> mask,
                   std::vector<Tensor>* attention = nullptr) const;

  // One series x, m of length T -> Z [T,D].
  Tensor reprogram_series(const ParameterStore& store, std::span<const double> x,
                          std::span<const std::uint8_t> mask) const;

  // H_v [V,S] for V series of length steps stacked in x. Empty when V = 0.
  std::optional<Tensor> embed(const ParameterStore& store, std::span<const double> x,
                              std::span<const std::uint8_t> mask,
                              std::size_t num_series) const;

  // Head-averaged attention [T,G'] of one series, as plain rows.
  std::vector<std::vector<double>> attention_map(const ParameterStore& store,
                                                 std::span<const double> x,
                                                 std::span<const std::uint8_t> mask) const;

 private:
  ReprogrammingConfig config_;
  const Backbone* backbone_;
};

// Writes an attention map as CSV: a header of prototype indices 0..G'-1
// preceded by "step,missing", then one row per time step.
void write_attention_csv(const std::vector<std::vector<double>>& attention,
                         std::span<const std::uint8_t> mask,
                         const std::filesystem::path& path);

}  // namespace vital

#endif  // VITAL_VITAL_EMBEDDING_H_
