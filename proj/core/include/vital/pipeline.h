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

#ifndef VITAL_PIPELINE_H_
#define VITAL_PIPELINE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vital/experiments.h"
#include "vital/grad_check.h"
#include "vital/model.h"
#include "vital/report.h"
#include "vital/run_config.h"
#include "vital/synthetic.h"
#include "vital/train.h"

namespace vital {

struct LoadedData {
  Dataset dataset;
  std::optional<GroundTruth> truth;
  Normalizer normalizer;
};

// Fills partition, splits and normalization statistics (fit on the training
// split) where the manifest lacks them. Named overrides take precedence over
// the missing-ratio rule.
void finalize_dataset(Dataset& dataset, std::uint64_t split_seed, double threshold,
                      const std::vector<std::string>& vitals,
                      const std::vector<std::string>& labs);

LoadedData load_dataset(const RunConfig& config);

struct PreparedSplits {
  std::vector<ModelInput> train;
  std::vector<ModelInput> validation;
  std::vector<ModelInput> test;
};

PreparedSplits prepare_splits(const LoadedData& data);

struct TrainedRun {
  VitalModel model;
  TrainResult result;
  SplitMetrics validation;
  SplitMetrics test;
};

// Builds the model for the config (train.seed drives the head init and the
// batch order), trains and evaluates it.
TrainedRun train_run(const RunConfig& config, const LoadedData& data,
                     const PreparedSplits& splits);

MetricsReport training_report(const RunConfig& config, const TrainedRun& run);

// Output root from VITAL_OUTPUT_ROOT, else "runs".
std::filesystem::path default_output_root();
std::filesystem::path default_run_directory(const RunConfig& config);

// Creates the directory. Throws ConfigError when it already exists and is
// non-empty unless force is set.
void claim_output(const std::filesystem::path& path, bool force);

inline constexpr const char* kCheckpointFile = "checkpoint.vitl";
inline constexpr const char* kConfigFile = "config.json";

// config.json, checkpoint.vitl, vocab.txt, history.csv, metrics.json and, for
// synthetic data, ground_truth.json.
void save_run(const std::filesystem::path& directory, const RunConfig& config,
              const LoadedData& data, const TrainedRun& run);

struct LoadedRun {
  RunConfig config;
  LoadedData data;
  VitalModel model;
};

// Throws ConfigError when the directory lacks a config or checkpoint.
LoadedRun load_run(const std::filesystem::path& directory);

// Figures for a trained model: attention CSV/SVG for the first test patient
// with observed vitals, lab embedding and patient representation PCA
// projections as CSV/SVG.
void export_figures(const LoadedRun& run, const std::filesystem::path& directory);

// Leave-fixed-sensors-out on the test split, one group per ratio. The removal
// order is ranked on the training split.
MetricsReport robustness_report(const LoadedRun& run, const RobustnessSettings& settings,
                                std::size_t threads);

enum class AblationKind { kNotMeasured, kMissingWord };

AblationKind parse_ablation_kind(const std::string& text);

// Trains one model per setting and seed of config.ablation and reports test
// metrics grouped by setting.
MetricsReport ablation_report(const RunConfig& config, const LoadedData& data,
                              const PreparedSplits& splits, AblationKind kind);

// Gradient check of the batch loss on the first two training patients.
// Trainable values are jittered first so that zero-initialised layers do not
// hide the paths behind them.
GradCheckResult pipeline_grad_check(const RunConfig& config, const LoadedData& data,
                                    const GradCheckOptions& options);

}  // namespace vital

#endif  // VITAL_PIPELINE_H_
