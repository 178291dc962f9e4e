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

#ifndef VITAL_BACKBONE_H_
#define VITAL_BACKBONE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vital/parameter_store.h"
#include "vital/tensor.h"

namespace vital {

// Dense, case-sensitive token table. Index = position in the list.
class Vocabulary {
 public:
  static constexpr std::string_view kReserved[] = {"Missing", "Null", "Apple",
                                                   "Engineering"};

  explicit Vocabulary(std::vector<std::string> tokens);
  // Reserved words, words of the bundled toy corpus, then filler tokens up to
  // `size` entries.
  static Vocabulary standard(std::size_t size);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool contains(std::string_view word) const;
  // Throws std::invalid_argument naming the closest known tokens.
  std::size_t index(std::string_view word) const;
  std::vector<std::string> nearest(std::string_view word, std::size_t k) const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

// Bundled sentences used by the optional next-token pretraining pass.
std::string_view toy_corpus();

struct BackboneConfig {
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t hidden_dim = 64;
  std::size_t ff_dim = 256;
  std::size_t vocab_size = 256;
  std::size_t max_context = 64;
  std::uint64_t seed = 7;

  void validate() const;
  std::size_t head_dim() const { return hidden_dim / num_heads; }
};

// Pre-LayerNorm decoder-only transformer with learned absolute positions.
// All parameters live in a ParameterStore under the "backbone." prefix and are
// frozen. Weight matrices and embedding tables are drawn from N(0, 0.02^2);
// biases start at zero and LayerNorm gains at one.
class Backbone {
 public:
  static constexpr std::string_view kPrefix = "backbone.";

  Backbone(BackboneConfig config, Vocabulary vocab);

  const BackboneConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }

  void init_frozen(ParameterStore& store) const;

  // Causal encoding of one sequence Z [T,D] -> hidden [T,D].
  Tensor forward(const ParameterStore& store, const Tensor& z) const;

  // Encodes `count` sequences stacked row-wise in z [count*T, D]. With
  // last_only the result is [count, D] holding each sequence's final hidden
  // row; the last block then skips rows nobody reads.
  Tensor forward_sequences(const ParameterStore& store, const Tensor& z,
                           std::size_t count, bool last_only) const;

  // Row E[index(word)] by value.
  std::vector<double> lookup_word(const ParameterStore& store,
                                  std::string_view word) const;
  // `rows` copies of the word embedding as a [rows, D] tensor.
  Tensor word_rows(const ParameterStore& store, std::string_view word,
                   std::size_t rows) const;
  const Tensor& word_embeddings(const ParameterStore& store) const;

  // Optional next-token training of the backbone on toy_corpus() before it is
  // frozen. Returns the final mean loss.
  double pretrain_on_corpus(ParameterStore& store, std::size_t steps,
                            std::uint64_t seed) const;

 private:
  Tensor block(const ParameterStore& store, std::size_t layer, const Tensor& h,
               std::size_t count, std::size_t steps, bool last_only) const;

  BackboneConfig config_;
  Vocabulary vocab_;
};

// Hidden row at index T-1 (left padding keeps a real step there).
Tensor last_step(const Tensor& hidden, std::size_t valid_length);

}  // namespace vital

#endif  // VITAL_BACKBONE_H_
