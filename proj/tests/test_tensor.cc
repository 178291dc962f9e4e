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
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "test_util.h"
#include "vital/grad_check.h"
#include "vital/ops.h"
#include "vital/optimizer.h"
#include "vital/parameter_store.h"

namespace vital {
namespace {

using testing::random_tensor;

double check(const std::function<Tensor()>& fn, std::vector<NamedTensor> params) {
  return grad_check(fn, std::move(params)).max_relative_error;
}

TEST(Primitives, SoftmaxOfZerosIsUniform) {
  Tensor y = ops::softmax_last_axis(Tensor::from({2}, {0.0, 0.0}));
  EXPECT_EQ(y.at(0), 0.5);
  EXPECT_EQ(y.at(1), 0.5);
}

TEST(Primitives, MatmulIdentity) {
  std::mt19937_64 rng(3);
  Tensor a = random_tensor({3, 3}, rng, false);
  Tensor eye = Tensor::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor y = ops::matmul(eye, a);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(y.at(i), a.at(i));
}

TEST(Primitives, RepeatScalar) {
  Tensor y = ops::repeat_last_dim(Tensor::scalar(2.5), 3);
  ASSERT_EQ(y.shape(), (Shape{3}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(y.at(i), 2.5);
}

TEST(Primitives, GeluAtZero) {
  EXPECT_EQ(ops::gelu(Tensor::scalar(0.0)).item(), 0.0);
}

TEST(Primitives, ShapeErrorNamesBothShapes) {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 5});
  try {
    ops::matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2,3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4,5]"), std::string::npos) << msg;
  }
}

TEST(Primitives, NonFiniteOutputRejected) {
  Tensor a = Tensor::from({2}, {1.0, 1e308});
  try {
    ops::scale(a, 10.0);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("scale"), std::string::npos) << e.what();
  }
}

TEST(Primitives, SoftmaxRowsSumToOne) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor y = ops::softmax_last_axis(random_tensor({5, 7}, rng, false, 5.0));
    for (std::size_t r = 0; r < 5; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < 7; ++c) {
        EXPECT_GE(y.at(r, c), 0.0);
        s += y.at(r, c);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Primitives, CausalSoftmaxIgnoresFuture) {
  Tensor a = Tensor::from({2, 2}, {1.0, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0});
  Tensor y = ops::softmax_last_axis(a, true);
  EXPECT_EQ(y.at(0, 0), 1.0);
  EXPECT_EQ(y.at(0, 1), 0.0);
  EXPECT_EQ(y.at(1, 0), 0.5);
}

TEST(Autodiff, SquareGradient) {
  Tensor x = Tensor::scalar(3.0, true);
  Tape tape;
  {
    TapeScope scope(tape);
    tape.backward(ops::mul(x, x));
  }
  EXPECT_EQ(x.grad()[0], 6.0);
}

TEST(Autodiff, IndependentParameterHasZeroGradient) {
  Tensor x = Tensor::scalar(3.0, true);
  Tensor p = Tensor::scalar(1.0, true);
  Tape tape;
  {
    TapeScope scope(tape);
    tape.backward(ops::mul(x, x));
  }
  EXPECT_EQ(p.grad()[0], 0.0);
}

TEST(Autodiff, BackwardTwiceRejected) {
  Tensor x = Tensor::scalar(2.0, true);
  Tape tape;
  TapeScope scope(tape);
  Tensor y = ops::mul(x, x);
  tape.backward(y);
  EXPECT_THROW(tape.backward(y), std::logic_error);
}

TEST(Autodiff, FanOutAccumulatesExactly) {
  std::mt19937_64 rng(5);
  Tensor x = random_tensor({4}, rng);
  Tensor w = random_tensor({4}, rng, false);
  auto g = [&] { return ops::mean(ops::mul(ops::gelu(x), w)); };
  std::vector<double> single;
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(g());
    single = x.grad();
  }
  x.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(ops::add(g(), g()));
  }
  const auto doubled = x.grad();
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(doubled[i], 2.0 * single[i]);
}

TEST(Autodiff, TwoLayerMapMatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  Tensor x = random_tensor({3, 4}, rng);
  Tensor w1 = random_tensor({4, 5}, rng);
  Tensor b1 = random_tensor({5}, rng);
  Tensor w2 = random_tensor({5, 2}, rng);
  Tensor r = random_tensor({3, 2}, rng, false);
  auto fn = [&] {
    Tensor h = ops::gelu(ops::add(ops::matmul(x, w1), b1));
    return ops::mean(ops::mul(ops::matmul(h, w2), r));
  };
  EXPECT_LT(check(fn, {{"x", x}, {"w1", w1}, {"b1", b1}, {"w2", w2}}), 1e-6);
}

// Every primitive against central differences over 20 seeds.
class PrimitiveGradients : public ::testing::TestWithParam<int> {};

TEST_P(PrimitiveGradients, MatchFiniteDifferences) {
  std::mt19937_64 rng(1000 + GetParam());
  Tensor a = random_tensor({3, 4}, rng);
  Tensor b = random_tensor({4, 2}, rng);
  Tensor c = random_tensor({3, 4}, rng);
  Tensor v = random_tensor({4}, rng);
  Tensor sq = random_tensor({4, 4}, rng);
  Tensor gain = random_tensor({4}, rng);
  Tensor table = random_tensor({5, 3}, rng);
  Tensor s = random_tensor({}, rng);
  const std::vector<std::size_t> idx = {4, 0, 4, 2};
  std::vector<double> targets(4);
  for (auto& t : targets) t = rng() % 2 == 0 ? 1.0 : 0.0;

  struct Case {
    const char* name;
    std::function<Tensor()> fn;
    std::vector<NamedTensor> params;
  };
  std::mt19937_64 wrng(rng());
  // mean(out * w) with w drawn once per case, so every output coordinate
  // matters and repeated evaluations agree.
  auto fixed = [&](std::function<Tensor()> inner) {
    Tensor probe = inner();
    Tensor w = random_tensor(probe.shape(), wrng, false);
    return std::function<Tensor()>([inner, w] { return ops::mean(ops::mul(inner(), w)); });
  };
  std::vector<Case> cases = {
      {"matmul", fixed([&] { return ops::matmul(a, b); }), {{"a", a}, {"b", b}}},
      {"add", fixed([&] { return ops::add(a, c); }), {{"a", a}, {"c", c}}},
      {"add_bias", fixed([&] { return ops::add(a, v); }), {{"a", a}, {"v", v}}},
      {"mul", fixed([&] { return ops::mul(a, c); }), {{"a", a}, {"c", c}}},
      {"scale", fixed([&] { return ops::scale(a, -1.7); }), {{"a", a}}},
      {"softmax", fixed([&] { return ops::softmax_last_axis(a); }), {{"a", a}}},
      {"softmax_causal", fixed([&] { return ops::softmax_last_axis(sq, true); }), {{"sq", sq}}},
      {"layer_norm", fixed([&] { return ops::layer_norm(a, gain, v); }),
       {{"a", a}, {"gain", gain}, {"v", v}}},
      {"gelu", fixed([&] { return ops::gelu(a); }), {{"a", a}}},
      {"concat0", fixed([&] { return ops::concat({a, c}, 0); }), {{"a", a}, {"c", c}}},
      {"concat1", fixed([&] { return ops::concat({a, c}, 1); }),
       {{"a", a}, {"c", c}}},
      {"slice", fixed([&] { return ops::slice(a, {1, 1}, {2, 2}); }), {{"a", a}}},
      {"transpose", fixed([&] { return ops::transpose(a); }), {{"a", a}}},
      {"mean_all", [&] { return ops::mean(ops::gelu(a)); }, {{"a", a}}},
      {"mean_axis0", fixed([&] { return ops::mean(a, 0); }), {{"a", a}}},
      {"mean_axis1", fixed([&] { return ops::mean(a, 1); }), {{"a", a}}},
      {"gather", fixed([&] { return ops::embedding_gather(table, idx); }), {{"table", table}}},
      {"repeat", fixed([&] { return ops::repeat_last_dim(v, 3); }), {{"v", v}}},
      {"repeat_scalar", fixed([&] { return ops::repeat_last_dim(s, 3); }), {{"s", s}}},
      {"reshape", fixed([&] { return ops::reshape(a, {2, 6}); }), {{"a", a}}},
      {"bce", [&] { return ops::mean(ops::binary_cross_entropy_with_logits(v, targets, 2.0)); },
       {{"v", v}}},
      {"softmax_ce", [&] { return ops::softmax_cross_entropy(v, 2); }, {{"v", v}}},
  };
  for (auto& cs : cases) {
    EXPECT_LT(check(cs.fn, cs.params), 1e-6) << cs.name;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, PrimitiveGradients, ::testing::Range(0, 20));

TEST(GradCheck, QuadraticFormIsTight) {
  std::mt19937_64 rng(2);
  Tensor x = random_tensor({5, 1}, rng);
  Tensor a = random_tensor({5, 5}, rng, false);
  auto fn = [&] { return ops::mean(ops::mul(x, ops::matmul(a, x))); };
  EXPECT_LT(check(fn, {{"x", x}}), 1e-8);
}

TEST(GradCheck, FrozenOnlyParametersAreSkipped) {
  Tensor x = Tensor::from({2}, {1.0, 2.0}, false);
  auto r = grad_check([&] { return ops::mean(ops::mul(x, x)); }, {{"x", x}});
  EXPECT_EQ(r.checked, 0u);
  EXPECT_EQ(r.skipped_frozen, 1u);
  EXPECT_EQ(r.max_relative_error, 0.0);
}

TEST(GradCheck, NonDeterministicFunctionRejected) {
  Tensor x = Tensor::scalar(1.0, true);
  double bump = 0.0;
  auto fn = [&] {
    bump += 1.0;
    return ops::scale(x, bump);
  };
  EXPECT_THROW(grad_check(fn, {{"x", x}}), std::runtime_error);
}

TEST(ParameterStore, SerializeRoundTripIsBitExact) {
  std::mt19937_64 rng(9);
  ParameterStore s;
  s.add("a", random_tensor({3, 2}, rng), false);
  s.add("frozen.b", random_tensor({4}, rng), true);
  s.add("c", random_tensor({}, rng), false);
  const std::string bytes = s.serialize();
  ASSERT_EQ(bytes.substr(0, 4), "VITL");
  const ParameterStore t = ParameterStore::deserialize(bytes);
  ASSERT_EQ(t.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& x = s.entries()[i];
    const auto& y = t.entries()[i];
    EXPECT_EQ(x.name, y.name);
    EXPECT_EQ(x.frozen, y.frozen);
    EXPECT_EQ(x.tensor.shape(), y.tensor.shape());
    for (std::size_t k = 0; k < x.tensor.size(); ++k) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(x.tensor.at(k)),
                std::bit_cast<std::uint64_t>(y.tensor.at(k)));
    }
  }
  EXPECT_EQ(t.serialize(), bytes);
}

TEST(ParameterStore, HeaderLayout) {
  ParameterStore s;
  s.add("w", Tensor::from({2}, {1.0, -2.0}), true);
  const std::string b = s.serialize();
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[off + i]);
    return v;
  };
  EXPECT_EQ(u32(4), 1u);   // version
  EXPECT_EQ(u32(8), 1u);   // entries
  EXPECT_EQ(u32(12), 1u);  // name length
  EXPECT_EQ(b[16], 'w');
  EXPECT_EQ(b[17], 1);     // frozen
  EXPECT_EQ(u32(18), 1u);  // rank
  EXPECT_EQ(b.size(), 22u + 8u + 16u);
}

TEST(ParameterStore, CorruptBytesRejected) {
  EXPECT_THROW(ParameterStore::deserialize("VITX"), std::runtime_error);
  ParameterStore s;
  s.add("w", Tensor::from({2}, {1.0, -2.0}), false);
  std::string b = s.serialize();
  b.resize(b.size() - 3);
  EXPECT_THROW(ParameterStore::deserialize(b), std::runtime_error);
}

TEST(Adam, FrozenEntriesKeepNoStateAndNeverMove) {
  std::mt19937_64 rng(4);
  ParameterStore s;
  s.add("w", random_tensor({3}, rng), false);
  s.add("f", random_tensor({3}, rng), true);
  const Tensor& w = s.get("w");
  const Tensor& f = s.get("f");
  const std::vector<double> f0(f.data().begin(), f.data().end());
  const std::vector<double> w0(w.data().begin(), w.data().end());
  Adam adam;
  for (int step = 0; step < 5; ++step) {
    s.zero_grad();
    Tape tape;
    TapeScope scope(tape);
    tape.backward(ops::mean(ops::mul(ops::add(w, f), ops::add(w, f))));
    adam.step(s);
  }
  EXPECT_TRUE(adam.has_state("w"));
  EXPECT_FALSE(adam.has_state("f"));
  EXPECT_EQ(adam.state_entries(), 1u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(f.at(i), f0[i]);
    EXPECT_NE(w.at(i), w0[i]);
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParameterStore s;
  Tensor& w = s.add("w", Tensor::from({2}, {1.0, -1.0}), false);
  Adam adam(AdamConfig{0.01});
  adam.step(s, {{"w", {3.0, -0.5}}});
  EXPECT_NEAR(w.at(0), 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(w.at(1), -1.0 + 0.01, 1e-9);
}

TEST(ParameterStore, ForkSharesValuesButNotGradients) {
  ParameterStore s;
  Tensor& w = s.add("w", Tensor::from({2}, {1.0, 2.0}, true), false);
  ParameterStore f = s.fork();
  {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(ops::mean(ops::mul(f.get("w"), f.get("w"))));
  }
  EXPECT_FALSE(w.has_grad());
  EXPECT_TRUE(f.get("w").has_grad());
  w.mutable_data()[0] = 5.0;
  EXPECT_EQ(f.get("w").at(0), 5.0);
}

}  // namespace
}  // namespace vital
