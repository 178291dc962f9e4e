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

#ifndef VITAL_DATASET_H_
#define VITAL_DATASET_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace vital {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

enum class VariableKind { kVital, kLab };

// One patient: a [num_steps, num_variables] grid of hourly values.
// mask(t, p) == 1 iff values(t, p) was observed; unobserved cells hold NaN
// and are never read by the model.
struct PatientRecord {
  std::string id;
  std::size_t num_steps = 0;
  std::size_t num_variables = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> padding;  // per step; 1 for prepended rows
  std::vector<double> demographics;
  int label = 0;
  std::size_t valid_length = 0;

  double value(std::size_t t, std::size_t p) const {
    return values[t * num_variables + p];
  }
  bool observed(std::size_t t, std::size_t p) const {
    return mask[t * num_variables + p] != 0;
  }
  // Observed values of one variable in time order.
  std::vector<double> observed_values(std::size_t p) const;
  bool ever_observed(std::size_t p) const;

  // Checks the grid and mask invariants; throws std::invalid_argument.
  void validate(int num_classes) const;

  // Builds a record from a dense grid, deriving the mask from NaN cells.
  static PatientRecord from_grid(std::string id, std::size_t num_variables,
                                 std::vector<double> values,
                                 std::vector<double> demographics, int label);
};

struct VariableInfo {
  std::string name;
  VariableKind nominal_kind = VariableKind::kLab;
  double missing_ratio = 0.0;
};

struct Partition {
  std::vector<std::size_t> vitals;
  std::vector<std::size_t> labs;
};

struct PartitionOverride {
  std::vector<std::size_t> vitals;
  std::vector<std::size_t> labs;
};

struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<std::uint8_t> constant;
  std::vector<double> demo_mean;
  std::vector<double> demo_stddev;
};

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct DatasetManifest {
  std::vector<VariableInfo> variables;
  std::vector<std::string> demographic_names;
  Partition partition;
  std::optional<NormalizationStats> normalization;
  std::size_t max_steps = 0;
  int num_classes = 2;
  Splits splits;

  std::size_t num_variables() const { return variables.size(); }
  std::size_t demo_dim() const { return demographic_names.size(); }
  std::size_t index_of(const std::string& name) const;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<PatientRecord> records;
};

struct IngestOptions {
  std::size_t max_steps = 60;
  std::string label_column = "SepsisLabel";
  std::vector<std::string> demographic_columns = {"Age", "Gender"};
  std::vector<std::string> ignored_columns = {"Unit1", "Unit2", "HospAdmTime",
                                              "ICULOS"};
  std::vector<std::string> vital_names = {"HR",  "O2Sat", "Temp", "SBP",
                                          "MAP", "DBP",   "Resp", "EtCO2"};
  // Consulted when a file has no label column: "id|label" rows keyed by file
  // stem.
  std::string label_sidecar = "labels.psv";

  static IngestOptions p19();
  static IngestOptions p12();
};

// Reads one pipe-separated file per patient (sorted by file name). "NaN" or
// an empty cell marks a missing value. Rows beyond max_steps are dropped from
// the front. Errors name the file and line.
Dataset ingest_psv(const std::filesystem::path& directory,
                   const IngestOptions& options = {});

// ratio_p = 1 - observed(p) / total non-padding steps over all records.
std::vector<double> compute_missing_ratios(const std::vector<PatientRecord>& records,
                                           std::size_t num_variables);

// Explicit override wins; otherwise nominal vitals whose missing ratio exceeds
// the threshold are treated as lab-like. Nominal labs never become vitals.
Partition partition_variables(const std::vector<double>& ratios,
                              const std::vector<VariableKind>& nominal,
                              const std::optional<PartitionOverride>& override_lists,
                              double threshold = 0.65);

class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(NormalizationStats stats) : stats_(std::move(stats)) {}

  // Observed-value statistics over the given records (training split only).
  void fit(const std::vector<PatientRecord>& records,
           const std::vector<std::size_t>& indices);
  PatientRecord apply(const PatientRecord& record) const;
  bool fitted() const { return stats_.has_value(); }
  const NormalizationStats& stats() const;

 private:
  std::optional<NormalizationStats> stats_;
};

// Shifts the record so its last real step sits at index max_steps - 1;
// prepended steps are unobserved and flagged as padding.
PatientRecord pad_left(const PatientRecord& record, std::size_t max_steps);

// Keeps the most recent max_steps real steps.
PatientRecord truncate_front(const PatientRecord& record, std::size_t max_steps);

// Seeded 70/15/15 split (fractions configurable).
Splits split_indices(std::size_t count, std::uint64_t seed,
                     double train_fraction = 0.7, double validation_fraction = 0.15);

// patients.jsonl + manifest.json bundle. Values are written for the valid
// steps only, with null for unobserved cells.
void write_bundle(const Dataset& dataset, const std::filesystem::path& directory);
Dataset read_bundle(const std::filesystem::path& directory);
void write_patients_jsonl(const std::vector<PatientRecord>& records,
                          const std::filesystem::path& path);
std::vector<PatientRecord> read_patients_jsonl(const std::filesystem::path& path,
                                               std::size_t num_variables);

}  // namespace vital

#endif  // VITAL_DATASET_H_
