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

#ifndef VITAL_SYNTHETIC_H_
#define VITAL_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "vital/dataset.h"

namespace vital {

// Desk-scale stand-in for an ICU cohort.
//
// Vital channels are AR(1) noise around a per-patient linear trend. Vital 0
// ("SBP") carries the label-driving trend; vital 1 ("DBP") follows a damped
// copy of it and vital 2 ("MAP") is the weighted average (SBP + 2 DBP) / 3,
// giving a linearly coupled triple. Lab 0 ("Lactate") reports a per-patient
// level that, together with the SBP trend, sets the label through
//
//   logit = label_scale * (trend_z + lab_weight * level_z) + bias,
//
// with bias solved for the requested positive fraction. Lab 1 ("WBC") is a
// noisy correlate of the level. Everything else is label-independent noise.
// Vitals lose single steps at random; labs are observed in short episodes and
// can be never measured in a window; for the driver lab that chance falls as
// the level rises.
struct SyntheticConfig {
  std::size_t num_patients = 2000;
  std::size_t num_steps = 48;
  std::size_t num_vitals = 8;
  std::size_t num_labs = 12;
  std::size_t min_valid_steps = 24;
  // Per-variable missing rates; empty selects the built-in profile.
  std::vector<double> vital_missing_rates;
  std::vector<double> lab_missing_rates;
  // Probability that a lab is never measured in a patient's window.
  std::vector<double> lab_never_measured;
  double label_scale = 8.0;
  double lab_weight = 0.5;
  bool informative_never = true;
  double positive_fraction = 0.3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruth {
  std::size_t driver_vital = 0;
  std::size_t driver_lab = 0;  // variable index
  std::vector<std::size_t> coupled_triple;
  std::vector<std::size_t> noise_variables;
  double label_scale = 0.0;
  double lab_weight = 0.0;
  double bias = 0.0;
  // Per patient: the generator's logit and the latent drivers.
  std::vector<double> logits;
  std::vector<double> terminal_slopes;
  std::vector<double> lab_levels;
};

struct SyntheticDataset {
  Dataset dataset;
  GroundTruth truth;
};

// Deterministic in (config, seed); patient i draws from a stream seeded with
// (seed, i). Throws std::invalid_argument for infeasible class balance.
SyntheticDataset generate_synthetic(const SyntheticConfig& config);

// AUROC of the generator's own logit against the drawn labels.
double bayes_ceiling_auroc(const SyntheticDataset& data);

void write_ground_truth(const GroundTruth& truth, const std::string& path);

}  // namespace vital

#endif  // VITAL_SYNTHETIC_H_
