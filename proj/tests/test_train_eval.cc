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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "json.hpp"
#include "test_util.h"
#include "vital/experiments.h"
#include "vital/metrics.h"
#include "vital/pipeline.h"
#include "vital/report.h"
#include "vital/synthetic.h"
#include "vital/train.h"

namespace vital {
namespace {

double brute_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return wins / pairs;
}

// Sum over distinct thresholds of (recall gain) * precision at that threshold.
double brute_auprc(const std::vector<double>& s, const std::vector<int>& y) {
  std::vector<double> thresholds = s;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const double npos = std::count(y.begin(), y.end(), 1);
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, sel = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= t) {
        sel += 1.0;
        tp += y[i];
      }
    const double recall = tp / npos;
    ap += (recall - prev_recall) * (tp / sel);
    prev_recall = recall;
  }
  return ap;
}

TEST(Auroc, WorkedExamples) {
  const std::vector<double> s = {0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y = {0, 0, 1, 1};
  EXPECT_EQ(auroc(s, y), 0.75);
  EXPECT_EQ(auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_EQ(auroc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{0, 1, 1}), 0.5);
  EXPECT_THROW(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}),
               std::invalid_argument);
}

TEST(Auprc, WorkedExamples) {
  EXPECT_EQ(auprc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}), 1.0);
  EXPECT_NEAR(auprc(std::vector<double>{0.8, 0.6, 0.4, 0.2}, std::vector<int>{1, 0, 1, 0}),
              (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
  EXPECT_THROW(auprc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}),
               std::invalid_argument);
}

TEST(Metrics, ExhaustiveOraclesOnRandomInstances) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 63;
    std::vector<double> s(n);
    std::vector<int> y(n);
    // Coarse scores force plenty of ties.
    const int levels = 1 + static_cast<int>(rng() % 12);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % levels) / levels;
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(auroc(s, y), brute_auroc(s, y), 1e-12);
    EXPECT_NEAR(auprc(s, y), brute_auprc(s, y), 1e-12);
  }
}

TEST(Auprc, RandomScoresApproachPrevalence) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 20000;
  const double prevalence = 0.2;
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = u(rng);
    y[i] = u(rng) < prevalence ? 1 : 0;
  }
  // AP of random scores has standard deviation about sqrt(pi(1-pi)/n_pos).
  const double npos = std::count(y.begin(), y.end(), 1);
  const double sigma = std::sqrt(prevalence * (1 - prevalence) / npos);
  EXPECT_NEAR(auprc(s, y), prevalence, 3 * sigma);
}

TEST(Spearman, MonotoneAndReversed) {
  const std::vector<double> x = {0.1, 0.2, 0.3, 0.4, 0.5};
  EXPECT_NEAR(spearman(x, std::vector<double>{1, 4, 9, 16, 25}), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, std::vector<double>{5, 3, 2, 1, 0}), -1.0, 1e-15);
  const auto ranks = average_ranks(std::vector<double>{3, 1, 3, 2});
  EXPECT_EQ(ranks, (std::vector<double>{3.5, 1, 3.5, 2}));
}

TEST(Pca, PointsOnALine) {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({1.0 + i, 2.0 - 2.0 * i, 0.5 * i});
  const auto r = pca_project(pts, 2);
  EXPECT_GT(r.variances[0], 1.0);
  EXPECT_NEAR(r.variances[1], 0.0, 1e-10);
}

TEST(Pca, CoordinatesAreCentered) {
  std::mt19937_64 rng(5);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 30; ++i) pts.push_back(testing::random_vector(4, rng));
  const auto r = pca_project(pts, 2);
  for (std::size_t k = 0; k < 2; ++k) {
    double s = 0.0;
    for (const auto& c : r.coordinates) s += c[k];
    EXPECT_NEAR(s / 30.0, 0.0, 1e-12);
    // Sign convention: largest-magnitude entry positive.
    const auto& comp = r.components[k];
    const auto it = std::max_element(comp.begin(), comp.end(),
                                     [](double a, double b) { return std::abs(a) < std::abs(b); });
    EXPECT_GT(*it, 0.0);
  }
}

TEST(Pca, ReconstructionMatchesFullEigendecomposition) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5, dim = 5;
    Eigen::MatrixXd x(n, dim);
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    std::normal_distribution<double> d(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < dim; ++j) x(i, j) = pts[i][j] = d(rng) * (1.0 + j);
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto r = pca_project(pts, k);
      Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
      Eigen::MatrixXd v(dim, k);
      for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < dim; ++j) v(j, c) = r.components[c][j];
      const double ours = (xc - xc * v * v.transpose()).squaredNorm();
      Eigen::MatrixXd cov = xc.transpose() * xc / static_cast<double>(n - 1);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
      const Eigen::MatrixXd top = es.eigenvectors().rightCols(k);
      const double oracle = (xc - xc * top * top.transpose()).squaredNorm();
      EXPECT_NEAR(ours, oracle, 1e-8) << "trial " << trial << " k " << k;
      for (std::size_t c = 0; c < k; ++c)
        EXPECT_NEAR(r.variances[c], es.eigenvalues()(dim - 1 - c), 1e-8);
    }
  }
}

TEST(Pca, Rejections) {
  EXPECT_THROW(pca_project({{1.0, 2.0}, {3.0, 4.0}}, 2), std::invalid_argument);
  EXPECT_THROW(pca_project({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}}, 2), std::invalid_argument);
}

Dataset single_signal_dataset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Dataset ds;
  ds.manifest.variables = {{"a", VariableKind::kVital, 0}, {"b", VariableKind::kVital, 0},
                           {"c", VariableKind::kLab, 0}, {"d", VariableKind::kLab, 0}};
  ds.manifest.max_steps = 4;
  for (int i = 0; i < 200; ++i) {
    const int y = i % 2;
    std::vector<double> v;
    for (int t = 0; t < 4; ++t) {
      v.push_back(d(rng));
      v.push_back(d(rng));
      v.push_back(y + 0.5 * d(rng));
      v.push_back(5.0);
    }
    ds.records.push_back(PatientRecord::from_grid("p" + std::to_string(i), 4, v, {}, y));
  }
  return ds;
}

TEST(SensorOrder, InformativeVariableFirstAndTiesStable) {
  const Dataset ds = single_signal_dataset(3);
  std::vector<std::size_t> all(200);
  std::iota(all.begin(), all.end(), 0);
  const auto order = sensor_removal_order(ds, all);
  EXPECT_EQ(order.front(), 2u);
  // The constant variable scores exactly zero and sits last.
  EXPECT_EQ(order.back(), 3u);
}

TEST(SensorOrder, TiesKeepIndexOrder) {
  Dataset ds;
  ds.manifest.variables = {{"a", VariableKind::kVital, 0}, {"b", VariableKind::kVital, 0},
                           {"c", VariableKind::kVital, 0}};
  for (int i = 0; i < 4; ++i)
    ds.records.push_back(PatientRecord::from_grid("p", 3, {1.0, 1.0, 1.0}, {}, i % 2));
  EXPECT_EQ(sensor_removal_order(ds, {0, 1, 2, 3}), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(SensorOrder, GeneratorDriversFirstNoiseInBottomHalf) {
  std::vector<double> rank_sum(20, 0.0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SyntheticConfig sc;
    sc.num_patients = 400;
    sc.num_steps = 12;
    sc.min_valid_steps = 6;
    sc.seed = seed;
    const auto syn = generate_synthetic(sc);
    const auto order = sensor_removal_order(syn.dataset, syn.dataset.manifest.splits.train);
    for (std::size_t r = 0; r < order.size(); ++r) rank_sum[order[r]] += r;
    // The label-driving vital and lab are among the top ranked.
    const auto pos = [&](std::size_t v) {
      return std::find(order.begin(), order.end(), v) - order.begin();
    };
    EXPECT_LT(pos(syn.truth.driver_vital), 4);
    EXPECT_LT(pos(syn.truth.driver_lab), 5);
  }
  SyntheticConfig sc;
  const auto truth = generate_synthetic([] {
                       SyntheticConfig c;
                       c.num_patients = 20;
                       return c;
                     }()).truth;
  double noise_mean = 0.0;
  for (std::size_t v : truth.noise_variables) noise_mean += rank_sum[v] / 10.0;
  noise_mean /= static_cast<double>(truth.noise_variables.size());
  EXPECT_GE(noise_mean, 10.0);
  // HR carries no label signal.
  EXPECT_GE(rank_sum[3] / 10.0, 10.0);
}

TEST(Robustness, RemovalCountsAndLabOnly) {
  RobustnessProtocol p;
  p.order = {4, 0, 3, 1, 2, 5, 6, 7, 8, 9};
  Partition part{{0, 1, 2, 3}, {4, 5, 6, 7, 8, 9}};
  EXPECT_EQ(removed_variables(p, 0.1, part, 10), (std::vector<std::size_t>{4}));
  EXPECT_EQ(removed_variables(p, 0.3, part, 10), (std::vector<std::size_t>{4, 0, 3}));
  EXPECT_EQ(removed_variables(p, 0.25, part, 10).size(), 3u);
  EXPECT_TRUE(removed_variables(p, 0.0, part, 10).empty());
  p.lab_only = true;
  EXPECT_EQ(removed_variables(p, 0.3, part, 10), (std::vector<std::size_t>{4, 5, 6}));
  EXPECT_EQ(removed_variables(p, 1.0, part, 10).size(), 6u);
  p.order = {0, 1};
  EXPECT_THROW(removed_variables(p, 0.1, part, 10), std::invalid_argument);
}

struct TinyTask {
  TinyTask() {
    SyntheticConfig sc;
    sc.num_patients = 60;
    sc.num_steps = 8;
    sc.min_valid_steps = 4;
    sc.num_vitals = 3;
    sc.num_labs = 3;
    syn = generate_synthetic(sc);
    norm = Normalizer(*syn.dataset.manifest.normalization);
    const auto& s = syn.dataset.manifest.splits;
    train = prepare_inputs(syn.dataset, s.train, norm);
    val = prepare_inputs(syn.dataset, s.validation, norm);
    test = prepare_inputs(syn.dataset, s.test, norm);
  }
  VitalModel model(std::uint64_t seed = 1,
                   NotMeasuredMode mode = NotMeasuredMode::kTrainable) const {
    ModelConfig c = testing::small_model_config();
    c.nm_mode = mode;
    return VitalModel(c, ModelLayout::from_manifest(syn.dataset.manifest), seed);
  }
  SyntheticDataset syn;
  Normalizer norm;
  std::vector<ModelInput> train, val, test;
};

const TinyTask& tiny() {
  static const TinyTask task;
  return task;
}

TEST(Train, ZeroEpochsKeepsInitialization) {
  auto m = tiny().model();
  const std::string before = m.parameters().serialize();
  TrainConfig tc;
  tc.epochs = 0;
  const auto r = train(m, tiny().train, tiny().val, tc);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(m.parameters().serialize(), before);
}

TEST(Train, BackboneUnchangedAfterHundredSteps) {
  auto m = tiny().model();
  const auto before = m.parameters().fingerprint(Backbone::kPrefix);
  const std::string trainable_before = m.parameters().serialize();
  TrainConfig tc;
  tc.batch_size = 4;
  tc.epochs = 100;
  tc.patience = 1000;
  tc.max_steps = 100;
  const auto r = train(m, tiny().train, {}, tc);
  EXPECT_EQ(r.steps, 100u);
  EXPECT_EQ(r.backbone_before, r.backbone_after);
  EXPECT_EQ(m.parameters().fingerprint(Backbone::kPrefix), before);
  EXPECT_NE(m.parameters().serialize(), trainable_before);
}

TEST(Train, DeterministicAndThreadCountInvariant) {
  TrainConfig tc;
  tc.batch_size = 8;
  tc.epochs = 2;
  auto a = tiny().model(5);
  auto b = tiny().model(5);
  const auto ra = train(a, tiny().train, tiny().val, tc);
  tc.threads = 3;
  const auto rb = train(b, tiny().train, tiny().val, tc);
  EXPECT_EQ(a.parameters().serialize(), b.parameters().serialize());
  ASSERT_EQ(ra.history.size(), rb.history.size());
  for (std::size_t i = 0; i < ra.history.size(); ++i)
    EXPECT_EQ(ra.history[i].train_loss, rb.history[i].train_loss);
  EXPECT_EQ(predict(a, tiny().test, 1), predict(b, tiny().test, 4));
}

TEST(Train, DivergenceReportsStep) {
  auto m = tiny().model();
  TrainConfig tc;
  tc.learning_rate = 1e200;
  tc.batch_size = 4;
  tc.epochs = 5;
  try {
    train(m, tiny().train, {}, tc);
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_GE(e.step(), 1u);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(Train, ConfigValidation) {
  TrainConfig tc;
  tc.learning_rate = 0.0;
  EXPECT_THROW(tc.validate(), std::invalid_argument);
  tc.learning_rate = 1e-3;
  tc.batch_size = 0;
  EXPECT_THROW(tc.validate(), std::invalid_argument);
}

TEST(Train, HistoryCsv) {
  const auto dir = testing::scratch_dir("history");
  write_history_csv({{1, 3, 0.5, 0.75, 0.5}}, dir / "h.csv");
  std::ifstream in(dir / "h.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "epoch,step,train_loss,val_auroc,val_auprc");
  EXPECT_EQ(row.rfind("1,3,", 0), 0u);
}

TEST(Robustness, ZeroRatioEqualsPlainEvaluation) {
  auto m = tiny().model(2);
  const auto& ds = tiny().syn.dataset;
  RobustnessProtocol p;
  p.order = sensor_removal_order(ds, ds.manifest.splits.train);
  p.ratios = {0.0};
  const auto pts = leave_fixed_sensors_out(m, ds, ds.manifest.splits.test, tiny().norm, p);
  const auto plain = evaluate(m, tiny().test, "test");
  EXPECT_EQ(pts[0].metrics.auroc, plain.auroc);
  EXPECT_EQ(pts[0].metrics.auprc, plain.auprc);
}

TEST(Robustness, RemovingAnAllMissingVariableIsANoOp) {
  auto m = tiny().model(2);
  Dataset ds = tiny().syn.dataset;
  // Blank lab 2 everywhere, then remove exactly it.
  const std::size_t target = ds.manifest.partition.labs.back();
  for (auto& r : ds.records) r = mask_variables(r, {target});
  const auto& test = ds.manifest.splits.test;
  const auto plain = evaluate(m, prepare_inputs(ds, test, tiny().norm), "test");
  const auto removed = evaluate(m, prepare_inputs(ds, test, tiny().norm, {target}), "test");
  EXPECT_EQ(plain.auroc, removed.auroc);
  EXPECT_EQ(plain.auprc, removed.auprc);
}

TEST(Ablation, SwappingWordOnFullyObservedRecordKeepsLogits) {
  auto m = tiny().model(3);
  ModelInput in = tiny().test.front();
  std::fill(in.vital_mask.begin(), in.vital_mask.end(), 1);
  const double a = m.score(in);
  m.set_missing_word("Engineering");
  EXPECT_EQ(a, m.score(in));
  // With missing steps the word matters.
  ModelInput gap = in;
  gap.vital_mask[0] = 0;
  gap.vital_values[0] = 0.0;
  const double b = m.score(gap);
  m.set_missing_word("Missing");
  EXPECT_NE(b, m.score(gap));
  EXPECT_THROW(m.set_missing_word("Foo"), std::invalid_argument);
}

TEST(Ablation, ZeroModeTokenNeverChanges) {
  auto m = tiny().model(4, NotMeasuredMode::kZero);
  TrainConfig tc;
  tc.epochs = 1;
  train(m, tiny().train, tiny().val, tc);
  for (double v : m.parameters().get("lab.nm_token").data()) EXPECT_EQ(v, 0.0);
}

TEST(Model, BatchedLogitsMatchSingleSamples) {
  auto m = tiny().model(6);
  std::vector<const ModelInput*> ptrs;
  for (std::size_t i = 0; i < 5; ++i) ptrs.push_back(&tiny().train[i]);
  const auto batch = m.logits_batch(m.parameters(), ptrs);
  for (std::size_t i = 0; i < 5; ++i)
    EXPECT_NEAR(batch[i].item(), m.logits(m.parameters(), *ptrs[i]).item(), 1e-12);
}

TEST(Model, CheckpointRoundTripReproducesScores) {
  auto a = tiny().model(7);
  TrainConfig tc;
  tc.epochs = 1;
  train(a, tiny().train, tiny().val, tc);
  const auto dir = testing::scratch_dir("checkpoint");
  a.parameters().save(dir / "c.vitl");
  auto b = tiny().model(7);
  b.load_parameters(ParameterStore::load(dir / "c.vitl"));
  EXPECT_EQ(predict(a, tiny().test), predict(b, tiny().test));
  ParameterStore wrong;
  wrong.add("x", Tensor::zeros({1}), false);
  EXPECT_THROW(b.load_parameters(wrong), std::invalid_argument);
}

TEST(Separation, TokenFarFromMeasuredCloudAtRandomInit) {
  auto m = tiny().model(8);
  const auto d = separation_diagnostic(m, tiny().test);
  EXPECT_GT(d.measured_points, 0u);
  EXPECT_LE(d.token_nearest_distance, d.token_knn_distance);
  EXPECT_GT(d.median_pairwise_distance, 0.0);
}

TEST(Attention, OverlapIsBounded) {
  auto m = tiny().model(9);
  const auto o = attention_overlap(m, tiny().test, {0, 1, 2}, 5, 10, 1);
  EXPECT_GE(o.observed, 0.0);
  EXPECT_LE(o.observed, 5.0);
  EXPECT_GE(o.chance, 0.0);
  EXPECT_GT(o.patients, 0u);
}

TEST(Report, JsonCarriesMeanAndSampleStd) {
  MetricsReport r;
  r.protocol = "ablate_not_measured";
  r.groups = {{"trainable", {1, 2, 3}, {0.8, 0.9, 1.0}, {0.5, 0.5, 0.5}}};
  r.reference = {{"p19_trainable_auroc", 89.3}};
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["protocol"], "ablate_not_measured");
  EXPECT_NEAR(j["groups"][0]["auroc_mean"].get<double>(), 0.9, 1e-15);
  EXPECT_NEAR(j["groups"][0]["auroc_std"].get<double>(), 0.1, 1e-15);
  EXPECT_EQ(j["groups"][0]["auprc_std"].get<double>(), 0.0);
  EXPECT_EQ(r.to_json(), r.to_json());
  EXPECT_EQ(sample_stddev({0.5}), 0.0);
}

}  // namespace
}  // namespace vital
