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

#ifndef VITAL_TRAIN_H_
#define VITAL_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "vital/model.h"

namespace vital {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  std::size_t patience = 5;
  std::uint64_t seed = 1;
  double pos_weight = 1.0;
  // Stops after this many optimizer steps when nonzero.
  std::size_t max_steps = 0;
  std::size_t threads = 1;
  // Samples per tape. Gradients are summed chunk by chunk in sample order, so
  // results do not depend on the thread count.
  std::size_t chunk_size = 4;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double train_loss = 0.0;
  double val_auroc = 0.0;
  double val_auprc = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t steps = 0;
  std::size_t best_epoch = 0;
  double best_val_auroc = 0.0;
  std::uint64_t backbone_before = 0;
  std::uint64_t backbone_after = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t step, const std::string& what)
      : std::runtime_error("training diverged at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// Adam on every non-frozen parameter with early stopping on validation AUROC.
// On return the model holds the best-validation parameters (the final ones
// when no validation set is given). Throws std::logic_error if the backbone
// fingerprint changes.
TrainResult train(VitalModel& model, const std::vector<ModelInput>& train_set,
                  const std::vector<ModelInput>& validation_set, const TrainConfig& config);

// Positive-class scores in input order.
std::vector<double> predict(const VitalModel& model, const std::vector<ModelInput>& inputs,
                            std::size_t threads = 1);

struct SplitMetrics {
  std::string split;
  double auroc = 0.0;
  double auprc = 0.0;
  std::size_t count = 0;
  std::size_t positives = 0;
};

SplitMetrics evaluate(const VitalModel& model, const std::vector<ModelInput>& inputs,
                      const std::string& split, std::size_t threads = 1);

void write_history_csv(const std::vector<EpochRecord>& history,
                       const std::filesystem::path& path);

}  // namespace vital

#endif  // VITAL_TRAIN_H_
