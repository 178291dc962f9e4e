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

#include "vital/backbone.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "vital/ops.h"
#include "vital/optimizer.h"

namespace vital {

namespace {

constexpr std::string_view kCorpus =
    "the monitor shows the heart rate is stable . "
    "the blood pressure value is Missing at this hour . "
    "a Missing value means the sensor did not record . "
    "the lab result is Null when the test was not ordered . "
    "Null and Missing both mean no value was observed . "
    "the nurse checks the temperature every hour . "
    "the patient has a high heart rate and low blood pressure . "
    "the doctor orders a lab test for lactate . "
    "the lactate is high and the patient may have sepsis . "
    "sepsis causes fever and a fast heart rate . "
    "the oxygen saturation dropped during the night . "
    "the respiration rate is fast and the patient is tired . "
    "mean arterial pressure is an average of systolic and diastolic pressure . "
    "the systolic pressure rose over the last hours . "
    "the diastolic pressure fell over the last hours . "
    "the value is Missing because the monitor was off . "
    "an Apple is a fruit that grows on a tree . "
    "she ate an Apple after lunch . "
    "Engineering is the design of machines and bridges . "
    "he studied Engineering at the university . "
    "the bridge was built by Engineering students . "
    "the creatinine level is normal . "
    "the white blood cell count is high . "
    "the platelet count is low . "
    "the glucose value is Missing for this patient . "
    "the patient was admitted to the unit at night . "
    "the trend of the heart rate is rising . "
    "the trend of the blood pressure is falling . "
    "no lab test was ordered so the result is Null . "
    "the record has a Missing hour between two values . ";

std::vector<std::string> corpus_words() {
  std::vector<std::string> words;
  std::istringstream in{std::string(kCorpus)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string layer_name(std::size_t layer, std::string_view leaf) {
  return std::string(Backbone::kPrefix) + "h" + std::to_string(layer) + "." +
         std::string(leaf);
}

std::string top_name(std::string_view leaf) {
  return std::string(Backbone::kPrefix) + std::string(leaf);
}

}  // namespace

std::string_view toy_corpus() { return kCorpus; }

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!lookup_.emplace(tokens_[i], i).second) {
      throw std::invalid_argument("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
  if (!lookup_.count("Missing")) {
    throw std::invalid_argument("vocabulary must contain \"Missing\"");
  }
}

Vocabulary Vocabulary::standard(std::size_t size) {
  std::vector<std::string> tokens;
  auto push = [&](const std::string& w) {
    if (tokens.size() < size &&
        std::find(tokens.begin(), tokens.end(), w) == tokens.end()) {
      tokens.push_back(w);
    }
  };
  if (size < std::size(kReserved)) {
    throw std::invalid_argument("vocabulary size must be at least 4");
  }
  for (auto r : kReserved) push(std::string(r));
  for (const auto& w : corpus_words()) push(w);
  for (std::size_t i = 0; tokens.size() < size; ++i) push("<tok" + std::to_string(i) + ">");
  return Vocabulary(std::move(tokens));
}

bool Vocabulary::contains(std::string_view word) const {
  return lookup_.count(std::string(word)) > 0;
}

std::vector<std::string> Vocabulary::nearest(std::string_view word,
                                             std::size_t k) const {
  std::vector<std::pair<std::size_t, std::size_t>> scored;
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    scored.emplace_back(edit_distance(word, tokens_[i]), i);
  std::stable_sort(scored.begin(), scored.end(),
                   [](auto& a, auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i)
    out.push_back(tokens_[scored[i].second]);
  return out;
}

std::size_t Vocabulary::index(std::string_view word) const {
  auto it = lookup_.find(std::string(word));
  if (it != lookup_.end()) return it->second;
  std::string msg = "unknown word '" + std::string(word) + "'; nearest tokens:";
  for (const auto& t : nearest(word, 3)) msg += " '" + t + "'";
  throw std::invalid_argument(msg);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

void BackboneConfig::validate() const {
  if (num_layers == 0 || num_heads == 0 || hidden_dim == 0 || ff_dim == 0 ||
      vocab_size == 0 || max_context == 0) {
    throw std::invalid_argument("backbone dimensions must be positive");
  }
  if (hidden_dim % num_heads != 0) {
    throw std::invalid_argument("backbone hidden_dim " + std::to_string(hidden_dim) +
                                " not divisible by num_heads " +
                                std::to_string(num_heads));
  }
}

Backbone::Backbone(BackboneConfig config, Vocabulary vocab)
    : config_(config), vocab_(std::move(vocab)) {
  config_.validate();
  if (vocab_.size() != config_.vocab_size) {
    throw std::invalid_argument("vocabulary has " + std::to_string(vocab_.size()) +
                                " tokens but vocab_size is " +
                                std::to_string(config_.vocab_size));
  }
}

void Backbone::init_frozen(ParameterStore& store) const {
  std::mt19937_64 rng(config_.seed);
  std::normal_distribution<double> normal(0.0, 0.02);
  auto randn = [&](Shape shape) {
    std::vector<double> v(num_elements(shape));
    for (double& x : v) x = normal(rng);
    return Tensor::from(std::move(shape), std::move(v));
  };
  const std::size_t d = config_.hidden_dim, f = config_.ff_dim;
  store.add(top_name("wte"), randn({config_.vocab_size, d}), true);
  store.add(top_name("wpe"), randn({config_.max_context, d}), true);
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    store.add(layer_name(l, "ln1.g"), Tensor::full({d}, 1.0), true);
    store.add(layer_name(l, "ln1.b"), Tensor::zeros({d}), true);
    store.add(layer_name(l, "attn.w_qkv"), randn({d, 3 * d}), true);
    store.add(layer_name(l, "attn.b_qkv"), Tensor::zeros({3 * d}), true);
    store.add(layer_name(l, "attn.w_proj"), randn({d, d}), true);
    store.add(layer_name(l, "attn.b_proj"), Tensor::zeros({d}), true);
    store.add(layer_name(l, "ln2.g"), Tensor::full({d}, 1.0), true);
    store.add(layer_name(l, "ln2.b"), Tensor::zeros({d}), true);
    store.add(layer_name(l, "mlp.w_fc"), randn({d, f}), true);
    store.add(layer_name(l, "mlp.b_fc"), Tensor::zeros({f}), true);
    store.add(layer_name(l, "mlp.w_proj"), randn({f, d}), true);
    store.add(layer_name(l, "mlp.b_proj"), Tensor::zeros({d}), true);
  }
  store.add(top_name("ln_f.g"), Tensor::full({d}, 1.0), true);
  store.add(top_name("ln_f.b"), Tensor::zeros({d}), true);
}

Tensor Backbone::block(const ParameterStore& store, std::size_t layer,
                       const Tensor& h, std::size_t count, std::size_t steps,
                       bool last_only) const {
  using namespace ops;
  auto p = [&](std::string_view leaf) -> const Tensor& {
    return store.get(layer_name(layer, leaf));
  };
  const std::size_t d = config_.hidden_dim;
  const std::size_t heads = config_.num_heads;
  const std::size_t hd = config_.head_dim();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));

  const Tensor a = layer_norm(h, p("ln1.g"), p("ln1.b"));
  std::vector<Tensor> per_sequence;
  per_sequence.reserve(count);
  Tensor residual;
  if (!last_only) {
    const Tensor qkv = add(matmul(a, p("attn.w_qkv")), p("attn.b_qkv"));
    for (std::size_t b = 0; b < count; ++b) {
      std::vector<Tensor> head_out;
      for (std::size_t k = 0; k < heads; ++k) {
        const std::size_t r0 = b * steps;
        Tensor q = slice(qkv, {r0, k * hd}, {steps, hd});
        Tensor key = slice(qkv, {r0, d + k * hd}, {steps, hd});
        Tensor v = slice(qkv, {r0, 2 * d + k * hd}, {steps, hd});
        Tensor att = softmax_last_axis(
            scale(matmul(q, transpose(key)), inv_sqrt), /*causal=*/true);
        head_out.push_back(matmul(att, v));
      }
      per_sequence.push_back(concat(head_out, 1));
    }
    residual = h;
  } else {
    const Tensor& w = p("attn.w_qkv");
    const Tensor& bias = p("attn.b_qkv");
    const Tensor kv = add(matmul(a, slice(w, {0, d}, {d, 2 * d})),
                          slice(bias, {d}, {2 * d}));
    std::vector<std::size_t> last_rows(count);
    for (std::size_t b = 0; b < count; ++b) last_rows[b] = b * steps + steps - 1;
    const Tensor q_all = add(matmul(embedding_gather(a, last_rows),
                                    slice(w, {0, 0}, {d, d})),
                             slice(bias, {0}, {d}));
    for (std::size_t b = 0; b < count; ++b) {
      std::vector<Tensor> head_out;
      for (std::size_t k = 0; k < heads; ++k) {
        const std::size_t r0 = b * steps;
        Tensor q = slice(q_all, {b, k * hd}, {1, hd});
        Tensor key = slice(kv, {r0, k * hd}, {steps, hd});
        Tensor v = slice(kv, {r0, d + k * hd}, {steps, hd});
        Tensor att = softmax_last_axis(scale(matmul(q, transpose(key)), inv_sqrt));
        head_out.push_back(matmul(att, v));
      }
      per_sequence.push_back(concat(head_out, 1));
    }
    residual = embedding_gather(h, last_rows);
  }
  const Tensor ctx = concat(per_sequence, 0);
  const Tensor x = add(residual, add(matmul(ctx, p("attn.w_proj")), p("attn.b_proj")));
  const Tensor m = layer_norm(x, p("ln2.g"), p("ln2.b"));
  const Tensor ff = add(matmul(gelu(add(matmul(m, p("mlp.w_fc")), p("mlp.b_fc"))),
                               p("mlp.w_proj")),
                        p("mlp.b_proj"));
  return add(x, ff);
}

Tensor Backbone::forward_sequences(const ParameterStore& store, const Tensor& z,
                                   std::size_t count, bool last_only) const {
  if (z.rank() != 2 || z.dim(1) != config_.hidden_dim || count == 0 ||
      z.dim(0) % count != 0) {
    throw ShapeError("backbone input " + shape_to_string(z.shape()) +
                     " is not " + std::to_string(count) + " stacked [T," +
                     std::to_string(config_.hidden_dim) + "] sequences");
  }
  const std::size_t steps = z.dim(0) / count;
  if (steps > config_.max_context) {
    throw std::invalid_argument("sequence length " + std::to_string(steps) +
                                " exceeds backbone context " +
                                std::to_string(config_.max_context));
  }
  std::vector<std::size_t> positions(count * steps);
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i % steps;
  Tensor h = ops::add(z, ops::embedding_gather(store.get(top_name("wpe")), positions));
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    h = block(store, l, h, count, steps,
              last_only && l + 1 == config_.num_layers);
  }
  return ops::layer_norm(h, store.get(top_name("ln_f.g")),
                         store.get(top_name("ln_f.b")));
}

Tensor Backbone::forward(const ParameterStore& store, const Tensor& z) const {
  return forward_sequences(store, z, 1, false);
}

const Tensor& Backbone::word_embeddings(const ParameterStore& store) const {
  return store.get(top_name("wte"));
}

std::vector<double> Backbone::lookup_word(const ParameterStore& store,
                                          std::string_view word) const {
  const std::size_t idx = vocab_.index(word);
  const auto table = word_embeddings(store).data();
  const std::size_t d = config_.hidden_dim;
  return {table.begin() + static_cast<std::ptrdiff_t>(idx * d),
          table.begin() + static_cast<std::ptrdiff_t>((idx + 1) * d)};
}

Tensor Backbone::word_rows(const ParameterStore& store, std::string_view word,
                           std::size_t rows) const {
  const std::vector<std::size_t> idx(rows, vocab_.index(word));
  return ops::embedding_gather(word_embeddings(store), idx);
}

double Backbone::pretrain_on_corpus(ParameterStore& store, std::size_t steps,
                                    std::uint64_t seed) const {
  std::vector<std::size_t> tokens;
  for (const auto& w : corpus_words()) {
    if (vocab_.contains(w)) tokens.push_back(vocab_.index(w));
  }
  const std::size_t window = std::min<std::size_t>(config_.max_context, 16);
  if (tokens.size() <= window) return 0.0;
  std::vector<std::string> names;
  for (const auto& e : store.entries())
    if (std::string_view(e.name).starts_with(kPrefix)) names.push_back(e.name);
  for (const auto& n : names) store.set_frozen(n, false);

  Adam adam(AdamConfig{.learning_rate = 3e-3});
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> start(0, tokens.size() - window - 1);
  double last_loss = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t s0 = start(rng);
    std::vector<std::size_t> input(tokens.begin() + s0, tokens.begin() + s0 + window);
    Tape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      const Tensor& wte = word_embeddings(store);
      Tensor hidden = forward(store, ops::embedding_gather(wte, input));
      Tensor logits = ops::matmul(hidden, ops::transpose(wte));
      std::vector<Tensor> losses;
      for (std::size_t t = 0; t < window; ++t) {
        Tensor row = ops::reshape(ops::slice_rows(logits, t, 1), {vocab_.size()});
        losses.push_back(ops::softmax_cross_entropy(row, tokens[s0 + t + 1]));
      }
      std::vector<Tensor> flat;
      for (auto& l : losses) flat.push_back(ops::reshape(l, {1}));
      loss = ops::mean(ops::concat(flat, 0));
    }
    tape.backward(loss);
    last_loss = loss.item();
    adam.step(store);
    store.zero_grad();
  }
  for (const auto& n : names) store.set_frozen(n, true);
  return last_loss;
}

Tensor last_step(const Tensor& hidden, std::size_t valid_length) {
  if (hidden.rank() != 2) throw ShapeError("last_step needs [T,D] hidden states");
  const std::size_t steps = hidden.dim(0);
  if (valid_length < 1 || valid_length > steps) {
    throw std::invalid_argument("valid_length " + std::to_string(valid_length) +
                                " outside [1, " + std::to_string(steps) + "]");
  }
  return ops::reshape(ops::slice_rows(hidden, steps - 1, 1), {hidden.dim(1)});
}

}  // namespace vital
