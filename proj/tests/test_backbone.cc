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

#include <gtest/gtest.h>

#include <bit>
#include <random>

#include "test_util.h"
#include "vital/backbone.h"
#include "vital/dataset.h"
#include "vital/grad_check.h"
#include "vital/ops.h"

namespace vital {
namespace {

using testing::random_tensor;

BackboneConfig small_config(std::uint64_t seed = 7) {
  BackboneConfig c;
  c.num_layers = 2;
  c.num_heads = 4;
  c.hidden_dim = 16;
  c.ff_dim = 32;
  c.vocab_size = 40;
  c.max_context = 12;
  c.seed = seed;
  return c;
}

struct Fixture {
  explicit Fixture(std::uint64_t seed = 7)
      : backbone(small_config(seed), Vocabulary::standard(40)) {
    backbone.init_frozen(store);
  }
  Backbone backbone;
  ParameterStore store;
};

bool same_bits(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  return true;
}

TEST(Vocabulary, ReservedWordsPresentAndDense) {
  const auto v = Vocabulary::standard(40);
  EXPECT_EQ(v.size(), 40u);
  for (auto w : Vocabulary::kReserved) EXPECT_TRUE(v.contains(w)) << w;
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.index(v.token(i)), i);
  EXPECT_FALSE(v.contains("missing"));
}

TEST(Vocabulary, DuplicateTokensRejected) {
  EXPECT_THROW(Vocabulary({"Missing", "a", "a"}), std::invalid_argument);
}

TEST(Vocabulary, SaveLoadRoundTrip) {
  const auto dir = testing::scratch_dir("vocab");
  const auto v = Vocabulary::standard(40);
  v.save(dir / "vocab.txt");
  const auto w = Vocabulary::load(dir / "vocab.txt");
  EXPECT_EQ(v.tokens(), w.tokens());
}

TEST(Backbone, InitIsDeterministicAndFrozen) {
  Fixture a, b, c(8);
  EXPECT_EQ(a.store.serialize(), b.store.serialize());
  EXPECT_NE(a.store.fingerprint(), c.store.fingerprint());
  for (const auto& e : a.store.entries()) {
    EXPECT_TRUE(e.frozen) << e.name;
    EXPECT_FALSE(e.tensor.requires_grad()) << e.name;
  }
}

TEST(Backbone, HeadDimension) {
  BackboneConfig c = small_config();
  EXPECT_EQ(c.head_dim(), 4u);
  c.num_heads = 3;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Backbone, WordEmbeddingRowsAreFiniteAndNonzero) {
  Fixture f;
  const Tensor& e = f.backbone.word_embeddings(f.store);
  for (std::size_t g = 0; g < e.dim(0); ++g) {
    double n = 0.0;
    for (std::size_t d = 0; d < e.dim(1); ++d) n += e.at(g, d) * e.at(g, d);
    EXPECT_TRUE(std::isfinite(n));
    EXPECT_GT(n, 0.0);
  }
}

TEST(Backbone, CausalPerturbationLeavesEarlierRowsIdentical) {
  Fixture f;
  std::mt19937_64 rng(1);
  Tensor z = random_tensor({10, 16}, rng, false);
  const Tensor h = f.backbone.forward(f.store, z);
  Tensor z2 = z.clone();
  // Non-constant shift of row 5.
  for (std::size_t d = 0; d < 16; ++d) z2.mutable_data()[5 * 16 + d] += 0.1 * (d + 1);
  const Tensor h2 = f.backbone.forward(f.store, z2);
  for (std::size_t t = 0; t < 10; ++t) {
    const bool same = same_bits(h.data().subspan(t * 16, 16), h2.data().subspan(t * 16, 16));
    if (t < 5) {
      EXPECT_TRUE(same) << "row " << t;
    } else {
      EXPECT_FALSE(same) << "row " << t;
    }
  }
}

TEST(Backbone, CausalityForEveryStep) {
  Fixture f;
  std::mt19937_64 rng(2);
  Tensor z = random_tensor({6, 16}, rng, false);
  const Tensor h = f.backbone.forward(f.store, z);
  for (std::size_t tp = 1; tp < 6; ++tp) {
    Tensor z2 = z.clone();
    z2.mutable_data()[tp * 16 + 3] -= 1.0;
    const Tensor h2 = f.backbone.forward(f.store, z2);
    EXPECT_TRUE(same_bits(h.data().subspan(0, tp * 16), h2.data().subspan(0, tp * 16)));
  }
}

TEST(Backbone, SinglePosition) {
  Fixture f;
  std::mt19937_64 rng(3);
  Tensor z = random_tensor({4, 16}, rng, false);
  const Tensor one = f.backbone.forward(f.store, ops::slice_rows(z, 0, 1));
  const Tensor all = f.backbone.forward(f.store, z);
  ASSERT_EQ(one.shape(), (Shape{1, 16}));
  EXPECT_TRUE(same_bits(one.data(), all.data().subspan(0, 16)));
}

TEST(Backbone, ContextOverflowRejected) {
  Fixture f;
  EXPECT_THROW(f.backbone.forward(f.store, Tensor::zeros({13, 16})), std::invalid_argument);
}

TEST(Backbone, GradientWithRespectToInputMatchesFiniteDifferences) {
  Fixture f;
  std::mt19937_64 rng(4);
  Tensor z = random_tensor({5, 16}, rng, true);
  Tensor w = random_tensor({5, 16}, rng, false);
  auto fn = [&] { return ops::mean(ops::mul(f.backbone.forward(f.store, z), w)); };
  const auto r = grad_check(fn, {{"z", z}});
  EXPECT_LT(r.max_relative_error, 1e-5) << r.worst_index;
  EXPECT_EQ(r.checked, 80u);
}

TEST(Backbone, BatchedSequencesMatchSingleCalls) {
  Fixture f;
  std::mt19937_64 rng(5);
  Tensor a = random_tensor({6, 16}, rng, false);
  Tensor b = random_tensor({6, 16}, rng, false);
  const Tensor both = f.backbone.forward_sequences(f.store, ops::concat({a, b}, 0), 2, false);
  const Tensor last = f.backbone.forward_sequences(f.store, ops::concat({a, b}, 0), 2, true);
  const Tensor ha = f.backbone.forward(f.store, a);
  const Tensor hb = f.backbone.forward(f.store, b);
  for (std::size_t i = 0; i < 6 * 16; ++i) {
    EXPECT_NEAR(both.at(i), ha.at(i), 1e-12);
    EXPECT_NEAR(both.at(96 + i), hb.at(i), 1e-12);
  }
  for (std::size_t d = 0; d < 16; ++d) {
    EXPECT_NEAR(last.at(0, d), ha.at(5, d), 1e-12);
    EXPECT_NEAR(last.at(1, d), hb.at(5, d), 1e-12);
  }
}

TEST(Backbone, LookupWord) {
  Fixture f;
  const auto& e = f.backbone.word_embeddings(f.store);
  const std::size_t idx = f.backbone.vocab().index("Missing");
  const auto row = f.backbone.lookup_word(f.store, "Missing");
  for (std::size_t d = 0; d < 16; ++d) EXPECT_EQ(row[d], e.at(idx, d));
  EXPECT_NE(row, f.backbone.lookup_word(f.store, "Null"));
  try {
    f.backbone.lookup_word(f.store, "Foo");
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& err) {
    EXPECT_NE(std::string(err.what()).find("nearest"), std::string::npos);
  }
}

TEST(Backbone, LastStep) {
  Tensor h = Tensor::from({4, 2}, {0, 1, 2, 3, 4, 5, 6, 7});
  const Tensor r = last_step(h, 2);
  EXPECT_EQ(r.at(0), 6);
  EXPECT_EQ(r.at(1), 7);
  const Tensor one = last_step(Tensor::from({1, 2}, {8, 9}), 1);
  EXPECT_EQ(one.at(0), 8);
  EXPECT_THROW(last_step(h, 0), std::invalid_argument);
}

// Left padding puts the last real step at T-1, so last_step reads a real
// observation slot. The same hidden row appears unchanged when the record is
// laid out unpadded or with trailing filler, by causality.
TEST(Backbone, PaddedAndUnpaddedLayoutsAgreeOnFinalRealRow) {
  Fixture f;
  std::mt19937_64 rng(6);
  const std::size_t valid = 5, tmax = 9;
  auto rec = PatientRecord::from_grid("p", 1, {1, 2, 3, 4, 5}, {}, 0);
  const auto padded = pad_left(rec, tmax);
  ASSERT_EQ(padded.padding[tmax - 1], 0);
  ASSERT_TRUE(padded.observed(tmax - 1, 0));
  EXPECT_EQ(padded.value(tmax - 1, 0), 5.0);

  Tensor z = random_tensor({valid, 16}, rng, false);
  Tensor filler = random_tensor({tmax - valid, 16}, rng, false);
  const Tensor unpadded = f.backbone.forward(f.store, z);
  const Tensor trailing = f.backbone.forward(f.store, ops::concat({z, filler}, 0));
  EXPECT_TRUE(same_bits(last_step(unpadded, valid).data(),
                        trailing.data().subspan((valid - 1) * 16, 16)));
}

TEST(Backbone, PretrainingChangesWeightsButStaysFrozen) {
  Fixture f;
  const auto before = f.store.fingerprint();
  const double loss = f.backbone.pretrain_on_corpus(f.store, 3, 1);
  EXPECT_TRUE(std::isfinite(loss));
  EXPECT_NE(f.store.fingerprint(), before);
  for (const auto& e : f.store.entries()) EXPECT_TRUE(e.frozen);
}

}  // namespace
}  // namespace vital
