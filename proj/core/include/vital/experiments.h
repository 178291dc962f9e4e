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

#ifndef VITAL_EXPERIMENTS_H_
#define VITAL_EXPERIMENTS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vital/model.h"
#include "vital/train.h"

namespace vital {

// Variables ranked informative-first by |AUROC - 0.5| of each patient's mean
// observed value over the given records; patients without an observation
// take the variable's global mean. Ties keep variable index order.
std::vector<std::size_t> sensor_removal_order(const Dataset& dataset,
                                              const std::vector<std::size_t>& indices);

struct RobustnessProtocol {
  std::vector<std::size_t> order;
  std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5};
  bool lab_only = false;

  void validate(std::size_t num_variables) const;
};

// The first ceil(ratio * P) variables of the order, restricted to the lab
// partition (and capped at L) when lab_only is set.
std::vector<std::size_t> removed_variables(const RobustnessProtocol& protocol, double ratio,
                                           const Partition& partition,
                                           std::size_t num_variables);

struct RobustnessPoint {
  double ratio = 0.0;
  std::vector<std::size_t> removed;
  SplitMetrics metrics;
};

// Re-evaluates a trained model on test records whose removed variables are
// fully masked. No retraining.
std::vector<RobustnessPoint> leave_fixed_sensors_out(const VitalModel& model,
                                                     const Dataset& dataset,
                                                     const std::vector<std::size_t>& test,
                                                     const Normalizer& normalizer,
                                                     const RobustnessProtocol& protocol,
                                                     std::size_t threads = 1);

struct SeparationDiagnostic {
  std::size_t measured_points = 0;
  // Mean distance from the token to its k nearest measured embeddings.
  double token_knn_distance = 0.0;
  double token_nearest_distance = 0.0;
  double median_pairwise_distance = 0.0;
  bool separated = false;
};

// Measured-lab embeddings of the given inputs versus the nm_token.
SeparationDiagnostic separation_diagnostic(const VitalModel& model,
                                           const std::vector<ModelInput>& inputs,
                                           std::size_t k = 5, std::size_t max_points = 1500);

struct EmbeddingPoint {
  std::string tag;  // "measured" or "not_measured"
  std::string variable;
  std::vector<double> embedding;
};

// Lab embeddings for projection plots: one point per measured
// (patient, lab) pair plus one for the token.
std::vector<EmbeddingPoint> lab_embedding_points(const VitalModel& model,
                                                 const std::vector<ModelInput>& inputs,
                                                 const std::vector<std::string>& lab_names,
                                                 std::size_t max_points = 2000);

struct AttentionOverlap {
  double observed = 0.0;  // mean top-k overlap over variable pairs and patients
  double chance = 0.0;    // same statistic after shuffling prototype indices
  std::size_t patients = 0;
};

// Top-k prototype overlap between the given vitals (positions in the vital
// partition). Per patient, each vital's head-averaged attention is averaged
// over its observed steps before taking the top k.
AttentionOverlap attention_overlap(const VitalModel& model,
                                   const std::vector<ModelInput>& inputs,
                                   const std::vector<std::size_t>& vitals, std::size_t k,
                                   std::size_t permutations, std::uint64_t seed);

}  // namespace vital

#endif  // VITAL_EXPERIMENTS_H_
