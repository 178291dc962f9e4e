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

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "test_util.h"
#include "vital/dataset.h"
#include "vital/synthetic.h"

namespace vital {
namespace {

namespace fs = std::filesystem;

const double nan = kMissing;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::trunc) << text;
}

std::string join(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "|" : "") + cols[i];
  return s;
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

TEST(Ingest, MaskFollowsNaNCells) {
  const auto dir = testing::scratch_dir("ingest_basic");
  write_file(dir / "p1.psv",
             "HR|Lactate|Age|Gender|SepsisLabel\n"
             "80|NaN|60|1|0\n"
             "82|2.5|60|1|0\n"
             "81||60|1|1\n");
  write_file(dir / "p2.psv",
             "HR|Lactate|Age|Gender|SepsisLabel\n"
             "70|1.0|40|0|0\n");
  const Dataset ds = ingest_psv(dir);
  ASSERT_EQ(ds.records.size(), 2u);
  ASSERT_EQ(ds.manifest.num_variables(), 2u);
  const auto& r = ds.records[0];
  EXPECT_EQ(r.label, 1);
  EXPECT_EQ(r.num_steps, 3u);
  EXPECT_TRUE(r.observed(0, 0));
  EXPECT_FALSE(r.observed(0, 1));
  EXPECT_TRUE(r.observed(1, 1));
  EXPECT_FALSE(r.observed(2, 1));
  EXPECT_EQ(r.demographics, (std::vector<double>{60, 1}));
  EXPECT_EQ(ds.manifest.variables[0].missing_ratio, 0.0);
  EXPECT_DOUBLE_EQ(ds.manifest.variables[1].missing_ratio, 0.5);
  EXPECT_EQ(ds.manifest.variables[0].nominal_kind, VariableKind::kVital);
  EXPECT_EQ(ds.manifest.variables[1].nominal_kind, VariableKind::kLab);
}

TEST(Ingest, MalformedRowNamesFileAndLine) {
  const auto dir = testing::scratch_dir("ingest_bad_width");
  write_file(dir / "p1.psv", "HR|Age|Gender|SepsisLabel\n80|60|1|0\n80|60|1\n");
  try {
    ingest_psv(dir);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("p1.psv:3"), std::string::npos) << e.what();
  }
}

TEST(Ingest, UnparseableNumberRejected) {
  const auto dir = testing::scratch_dir("ingest_bad_number");
  write_file(dir / "p1.psv", "HR|Age|Gender|SepsisLabel\n8x0|60|1|0\n");
  try {
    ingest_psv(dir);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("p1.psv:2"), std::string::npos) << e.what();
  }
}

TEST(Ingest, MissingLabelRejected) {
  const auto dir = testing::scratch_dir("ingest_no_label");
  write_file(dir / "p1.psv", "HR|Age|Gender\n80|60|1\n");
  EXPECT_THROW(ingest_psv(dir), std::runtime_error);
}

TEST(Ingest, LabelSidecar) {
  const auto dir = testing::scratch_dir("ingest_sidecar");
  write_file(dir / "p1.psv", "HR|Age|Gender\n80|60|1\n");
  write_file(dir / "labels.psv", "id|label\np1|1\n");
  const Dataset ds = ingest_psv(dir);
  EXPECT_EQ(ds.records[0].label, 1);
}

TEST(Ingest, RowsBeyondWindowDroppedFromFront) {
  const auto dir = testing::scratch_dir("ingest_truncate");
  std::string text = "HR|Age|Gender|SepsisLabel\n";
  for (int t = 0; t < 65; ++t) text += std::to_string(t) + "|50|0|0\n";
  write_file(dir / "p1.psv", text);
  const Dataset ds = ingest_psv(dir, IngestOptions::p19());
  const auto& r = ds.records[0];
  EXPECT_EQ(r.num_steps, 60u);
  EXPECT_EQ(r.value(0, 0), 5.0);
  EXPECT_EQ(r.value(59, 0), 64.0);
}

const std::vector<std::string> kP19Vitals = {"HR",  "O2Sat", "Temp", "SBP",
                                             "MAP", "DBP",   "Resp", "EtCO2"};
const std::vector<std::string> kP19Labs = {
    "BaseExcess", "HCO3",      "FiO2",     "pH",         "PaCO2",   "SaO2",   "AST",
    "BUN",        "Alkalinephos", "Calcium", "Chloride", "Creatinine", "Bilirubin_direct",
    "Glucose",    "Lactate",   "Magnesium", "Phosphate", "Potassium", "Bilirubin_total",
    "TroponinI",  "Hct",       "Hgb",      "PTT",        "WBC",     "Fibrinogen", "Platelets"};

TEST(Ingest, P19ShapedExport) {
  const auto dir = testing::scratch_dir("ingest_p19");
  std::vector<std::string> header = kP19Vitals;
  header.insert(header.end(), kP19Labs.begin(), kP19Labs.end());
  for (const char* c : {"Age", "Gender", "Unit1", "Unit2", "HospAdmTime", "ICULOS",
                        "SepsisLabel"})
    header.push_back(c);
  std::string text = join(header) + "\n";
  for (int t = 0; t < 70; ++t) {
    std::vector<std::string> row(header.size(), "NaN");
    row[0] = "80";
    row[34] = "65";
    row[35] = "1";
    row[header.size() - 1] = t > 60 ? "1" : "0";
    text += join(row) + "\n";
  }
  write_file(dir / "p000001.psv", text);
  const Dataset ds = ingest_psv(dir, IngestOptions::p19());
  EXPECT_EQ(ds.manifest.num_variables(), 34u);
  EXPECT_EQ(ds.manifest.max_steps, 60u);
  EXPECT_EQ(ds.records[0].num_steps, 60u);
  std::size_t vitals = 0;
  for (const auto& v : ds.manifest.variables) vitals += v.nominal_kind == VariableKind::kVital;
  EXPECT_EQ(vitals, 8u);
}

TEST(Ingest, P12ShapedExport) {
  const auto dir = testing::scratch_dir("ingest_p12");
  const auto opt = IngestOptions::p12();
  std::vector<std::string> header = {"RecordID", "Time", "Age", "Gender", "Height", "ICUType",
                                     "Weight"};
  header.insert(header.end(), opt.vital_names.begin(), opt.vital_names.end());
  for (int i = 0; header.size() < 7 + 36; ++i) header.push_back("Lab" + std::to_string(i));
  header.push_back("In-hospital_death");
  std::string text = join(header) + "\n";
  std::vector<std::string> row(header.size(), "");
  row[0] = "1";
  row[2] = "70";
  row[3] = "0";
  row[7] = "90";
  row.back() = "1";
  text += join(row) + "\n";
  write_file(dir / "132539.psv", text);
  const Dataset ds = ingest_psv(dir, opt);
  EXPECT_EQ(ds.manifest.num_variables(), 36u);
  EXPECT_EQ(ds.manifest.max_steps, 215u);
  EXPECT_EQ(ds.manifest.demo_dim(), 5u);
  EXPECT_EQ(ds.records[0].label, 1);
}

TEST(MissingRatios, SingleMaskColumn) {
  auto r = PatientRecord::from_grid("a", 1, {1.0, nan, nan, nan}, {}, 0);
  EXPECT_DOUBLE_EQ(compute_missing_ratios({r}, 1)[0], 0.75);
  auto full = PatientRecord::from_grid("b", 1, {1.0, 2.0}, {}, 0);
  EXPECT_EQ(compute_missing_ratios({full}, 1)[0], 0.0);
}

TEST(MissingRatios, PaddingStepsDoNotCount) {
  auto r = pad_left(PatientRecord::from_grid("a", 1, {1.0, nan}, {}, 0), 6);
  EXPECT_DOUBLE_EQ(compute_missing_ratios({r}, 1)[0], 0.5);
}

TEST(Partition, ThresholdRule) {
  const std::vector<VariableKind> kinds = {VariableKind::kVital, VariableKind::kVital,
                                           VariableKind::kLab};
  const auto p = partition_variables({0.0, 0.6631, 0.1}, kinds, std::nullopt, 0.65);
  EXPECT_EQ(p.vitals, (std::vector<std::size_t>{0}));
  EXPECT_EQ(p.labs, (std::vector<std::size_t>{1, 2}));
}

TEST(Partition, NominalLabsNeverBecomeVitals) {
  const auto p = partition_variables({0.0}, {VariableKind::kLab}, std::nullopt, 0.65);
  EXPECT_TRUE(p.vitals.empty());
}

TEST(Partition, OverrideWinsAndMayEmptyVitals) {
  const std::vector<VariableKind> kinds(3, VariableKind::kVital);
  const auto p = partition_variables({0, 0, 0}, kinds, PartitionOverride{{}, {0, 1, 2}}, 0.65);
  EXPECT_TRUE(p.vitals.empty());
  EXPECT_EQ(p.labs.size(), 3u);
}

TEST(Partition, OverlappingOverrideRejected) {
  const std::vector<VariableKind> kinds(3, VariableKind::kVital);
  EXPECT_THROW(partition_variables({0, 0, 0}, kinds, PartitionOverride{{0, 1}, {1, 2}}),
               std::invalid_argument);
  EXPECT_THROW(partition_variables({0, 0, 0}, kinds, PartitionOverride{{0}, {1}}),
               std::invalid_argument);
}

TEST(Partition, IsAPartitionOnRandomInputs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<double> ratios(n);
    std::vector<VariableKind> kinds(n);
    for (std::size_t i = 0; i < n; ++i) {
      ratios[i] = u(rng);
      kinds[i] = rng() % 2 ? VariableKind::kVital : VariableKind::kLab;
    }
    const auto p = partition_variables(ratios, kinds, std::nullopt, 0.65);
    std::vector<std::size_t> all = p.vitals;
    all.insert(all.end(), p.labs.begin(), p.labs.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(n);
    std::iota(expected.begin(), expected.end(), 0);
    EXPECT_EQ(all, expected);
  }
}

TEST(Normalizer, ZScoresWithTrainStatistics) {
  std::vector<PatientRecord> recs = {
      PatientRecord::from_grid("a", 2, {1.0, nan, 3.0, 5.0}, {10.0}, 0),
      PatientRecord::from_grid("b", 2, {100.0, 5.0}, {20.0}, 1)};
  Normalizer n;
  EXPECT_THROW(n.apply(recs[0]), std::logic_error);
  n.fit(recs, {0});
  const auto& s = n.stats();
  EXPECT_EQ(s.mean[0], 2.0);
  EXPECT_EQ(s.stddev[0], 1.0);
  EXPECT_EQ(s.constant[1], 1);
  const auto a = n.apply(recs[0]);
  EXPECT_EQ(a.value(0, 0), -1.0);
  EXPECT_EQ(a.value(1, 0), 1.0);
  EXPECT_TRUE(std::isnan(a.value(0, 1)));
  EXPECT_FALSE(a.observed(0, 1));
  EXPECT_EQ(a.value(1, 1), 0.0);  // constant variable
  const auto b = n.apply(recs[1]);
  EXPECT_EQ(b.value(0, 0), 98.0);  // train statistics, not its own
}

TEST(Padding, RealRowsEndAtLastIndex) {
  auto r = PatientRecord::from_grid("a", 1, {7.0, 8.0}, {}, 0);
  const auto p = pad_left(r, 5);
  EXPECT_EQ(p.num_steps, 5u);
  EXPECT_EQ(p.value(3, 0), 7.0);
  EXPECT_EQ(p.value(4, 0), 8.0);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(p.mask[t], 0);
    EXPECT_EQ(p.padding[t], 1);
  }
  EXPECT_EQ(p.padding[3], 0);
  EXPECT_EQ(p.valid_length, 2u);
  p.validate(2);
}

TEST(Padding, FullLengthIsIdentity) {
  auto r = PatientRecord::from_grid("a", 2, {1, 2, nan, 4}, {}, 0);
  const auto p = pad_left(r, 2);
  EXPECT_EQ(p.mask, r.mask);
  EXPECT_EQ(p.padding, r.padding);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(same_bits(p.values[i], r.values[i]));
}

TEST(Padding, PreservesObservedValuesAndOrder) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t steps = 1 + rng() % 10, vars = 1 + rng() % 4;
    auto vals = testing::random_vector(steps * vars, rng);
    for (auto& v : vals)
      if (rng() % 3 == 0) v = nan;
    auto r = PatientRecord::from_grid("r", vars, vals, {}, 0);
    const auto p = pad_left(r, steps + rng() % 6);
    const std::size_t off = p.num_steps - steps;
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t v = 0; v < vars; ++v) {
        EXPECT_EQ(p.observed(t + off, v), r.observed(t, v));
        EXPECT_TRUE(same_bits(p.value(t + off, v), r.value(t, v)));
      }
  }
}

TEST(Padding, TooLongRejected) {
  auto r = PatientRecord::from_grid("a", 1, {1, 2, 3}, {}, 0);
  EXPECT_THROW(pad_left(r, 2), std::invalid_argument);
  EXPECT_EQ(truncate_front(r, 2).value(0, 0), 2.0);
}

TEST(Splits, DisjointAndCovering) {
  const auto s = split_indices(101, 4);
  std::set<std::size_t> all;
  for (auto* part : {&s.train, &s.validation, &s.test})
    for (auto i : *part) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 101u);
  EXPECT_EQ(s.train.size(), 71u);
  EXPECT_EQ(split_indices(101, 4).test, s.test);
}

TEST(Bundle, RoundTripPreservesValuesMasksLabels) {
  SyntheticConfig sc;
  sc.num_patients = 40;
  sc.num_steps = 10;
  sc.min_valid_steps = 3;
  const auto syn = generate_synthetic(sc);
  const auto dir = testing::scratch_dir("bundle");
  write_bundle(syn.dataset, dir);
  const Dataset back = read_bundle(dir);
  ASSERT_EQ(back.records.size(), syn.dataset.records.size());
  for (std::size_t i = 0; i < back.records.size(); ++i) {
    const auto& a = syn.dataset.records[i];
    const auto& b = back.records[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_EQ(a.padding, b.padding);
    EXPECT_EQ(a.valid_length, b.valid_length);
    ASSERT_EQ(a.values.size(), b.values.size());
    for (std::size_t k = 0; k < a.values.size(); ++k)
      EXPECT_TRUE(same_bits(a.values[k], b.values[k]) ||
                  (std::isnan(a.values[k]) && std::isnan(b.values[k])));
    for (std::size_t k = 0; k < a.demographics.size(); ++k)
      EXPECT_TRUE(same_bits(a.demographics[k], b.demographics[k]));
  }
  EXPECT_EQ(back.manifest.partition.vitals, syn.dataset.manifest.partition.vitals);
  EXPECT_EQ(back.manifest.splits.test, syn.dataset.manifest.splits.test);
  ASSERT_TRUE(back.manifest.normalization.has_value());
  EXPECT_EQ(back.manifest.normalization->mean, syn.dataset.manifest.normalization->mean);
}

TEST(Bundle, IngestSerializeIngestRoundTrip) {
  const auto dir = testing::scratch_dir("psv_round");
  write_file(dir / "a.psv", "HR|Lactate|Age|Gender|SepsisLabel\n80|NaN|60|1|0\n82.125|2.5|60|1|1\n");
  const Dataset ds = ingest_psv(dir);
  const auto out = testing::scratch_dir("psv_round_bundle");
  write_bundle(ds, out);
  const Dataset back = read_bundle(out);
  EXPECT_EQ(back.records[0].mask, ds.records[0].mask);
  EXPECT_EQ(back.records[0].value(1, 0), 82.125);
  EXPECT_EQ(back.records[0].label, 1);
}

TEST(Synthetic, SameSeedSameData) {
  SyntheticConfig sc;
  sc.num_patients = 30;
  sc.num_steps = 8;
  sc.min_valid_steps = 4;
  const auto a = generate_synthetic(sc);
  const auto b = generate_synthetic(sc);
  ASSERT_EQ(a.dataset.records.size(), b.dataset.records.size());
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_EQ(a.dataset.records[i].mask, b.dataset.records[i].mask);
    EXPECT_EQ(a.truth.logits[i], b.truth.logits[i]);
  }
  sc.seed = 2;
  EXPECT_NE(generate_synthetic(sc).truth.logits, a.truth.logits);
}

TEST(Synthetic, ZeroMissingRatesGiveFullyObservedData) {
  SyntheticConfig sc;
  sc.num_patients = 20;
  sc.num_steps = 6;
  sc.min_valid_steps = 6;
  sc.vital_missing_rates.assign(sc.num_vitals, 0.0);
  sc.lab_missing_rates.assign(sc.num_labs, 0.0);
  sc.lab_never_measured.assign(sc.num_labs, 0.0);
  sc.informative_never = false;
  const auto syn = generate_synthetic(sc);
  for (const auto& r : syn.dataset.records)
    for (auto m : r.mask) EXPECT_EQ(m, 1);
}

TEST(Synthetic, InfeasibleBalanceRejected) {
  SyntheticConfig sc;
  sc.num_patients = 3;
  sc.positive_fraction = 0.1;
  EXPECT_THROW(generate_synthetic(sc), std::invalid_argument);
  sc.num_patients = 100;
  sc.positive_fraction = 1.0;
  EXPECT_THROW(generate_synthetic(sc), std::invalid_argument);
}

TEST(Synthetic, ObservedMissingRatesTrackConfiguration) {
  SyntheticConfig sc;
  sc.num_patients = 400;
  const auto syn = generate_synthetic(sc);
  const auto& vars = syn.dataset.manifest.variables;
  EXPECT_NEAR(vars[0].missing_ratio, 0.10, 0.01);  // SBP
  EXPECT_NEAR(vars[7].missing_ratio, 0.55, 0.01);  // EtCO2
  EXPECT_NEAR(vars[8].missing_ratio, 0.85, 0.03);  // Lactate
  EXPECT_EQ(syn.dataset.manifest.partition.vitals.size(), 8u);
}

TEST(Synthetic, ClassBalanceNearTarget) {
  SyntheticConfig sc;
  sc.num_patients = 2000;
  const auto syn = generate_synthetic(sc);
  double pos = 0;
  for (const auto& r : syn.dataset.records) pos += r.label;
  EXPECT_NEAR(pos / 2000.0, sc.positive_fraction, 0.03);
}

TEST(Synthetic, MapIsWeightedAverageOfPressures) {
  SyntheticConfig sc;
  sc.num_patients = 20;
  sc.vital_missing_rates.assign(sc.num_vitals, 0.0);
  const auto syn = generate_synthetic(sc);
  double max_dev = 0.0;
  for (const auto& r : syn.dataset.records)
    for (std::size_t t = 0; t < r.num_steps; ++t) {
      const double avg = (r.value(t, 0) + 2 * r.value(t, 1)) / 3;
      max_dev = std::max(max_dev, std::abs(r.value(t, 2) - avg));
    }
  EXPECT_LT(max_dev, 3.0);  // N(0, 0.5^2) noise
}

TEST(Synthetic, BayesCeilingOnLargeDraw) {
  SyntheticConfig sc;
  sc.num_patients = 10000;
  sc.num_steps = 4;
  sc.min_valid_steps = 2;
  EXPECT_GE(bayes_ceiling_auroc(generate_synthetic(sc)), 0.98);
}

}  // namespace
}  // namespace vital
