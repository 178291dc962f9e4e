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

#ifndef VITAL_MODEL_H_
#define VITAL_MODEL_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vital/backbone.h"
#include "vital/dataset.h"
#include "vital/lab_embedding.h"
#include "vital/mixer_head.h"
#include "vital/parameter_store.h"
#include "vital/vital_embedding.h"

namespace vital {

struct ModelConfig {
  BackboneConfig backbone;
  ReprogrammingConfig reprogramming;
  NotMeasuredMode nm_mode = NotMeasuredMode::kTrainable;
  // Optional next-token steps on the toy corpus before freezing.
  std::size_t pretrain_steps = 0;
};

struct ModelLayout {
  std::size_t num_vitals = 0;
  std::size_t num_labs = 0;
  std::size_t demo_dim = 0;
  std::size_t max_steps = 0;
  int num_classes = 2;

  static ModelLayout from_manifest(const DatasetManifest& manifest);
};

// Model-ready view of one normalized, left-padded record.
struct ModelInput {
  std::size_t steps = 0;
  // Vital v occupies [v * steps, (v + 1) * steps). Masked cells hold 0.
  std::vector<double> vital_values;
  std::vector<std::uint8_t> vital_mask;
  std::vector<std::optional<LabStats>> labs;
  std::vector<double> demographics;
  int label = 0;
};

ModelInput make_input(const PatientRecord& record, const Partition& partition);

// Copy of the record with the given variables set to fully unobserved.
PatientRecord mask_variables(const PatientRecord& record,
                             const std::vector<std::size_t>& variables);

// Normalizes, pads to max_steps and converts the selected records.
std::vector<ModelInput> prepare_inputs(const Dataset& dataset,
                                       const std::vector<std::size_t>& indices,
                                       const Normalizer& normalizer,
                                       const std::vector<std::size_t>& removed = {});

// Intermediate values of one forward pass.
struct ForwardTrace {
  std::optional<Tensor> vital_context;
  std::optional<Tensor> lab_context;
  Tensor mixed;
  Tensor representation;
  Tensor logits;
};

class VitalModel {
 public:
  VitalModel(ModelConfig config, ModelLayout layout, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const ModelLayout& layout() const { return layout_; }
  const Backbone& backbone() const { return *backbone_; }
  const VitalEmbedding& vital_embedding() const { return *vital_; }
  const LabEmbedding& lab_embedding() const { return *lab_; }
  const MixerHead& mixer() const { return *mixer_; }
  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }

  void set_missing_word(const std::string& word);

  ForwardTrace trace(const ParameterStore& store, const ModelInput& input) const;
  Tensor logits(const ParameterStore& store, const ModelInput& input) const;
  Tensor loss(const ParameterStore& store, const ModelInput& input, double pos_weight) const;

  // Several samples in one pass. The vital series of all samples share one
  // reprogramming and backbone call; results equal the per-sample path.
  std::vector<Tensor> logits_batch(const ParameterStore& store,
                                   std::span<const ModelInput* const> inputs) const;
  // Mean loss over the given samples.
  Tensor loss_batch(const ParameterStore& store, std::span<const ModelInput* const> inputs,
                    double pos_weight) const;
  // Positive-class score: the logit for two classes, else the softmax
  // probability of the last class.
  double score(const ModelInput& input) const;

  // Replaces parameter values with a checkpoint's; names, shapes and frozen
  // flags must agree.
  void load_parameters(const ParameterStore& checkpoint);

 private:
  ModelConfig config_;
  ModelLayout layout_;
  std::unique_ptr<Backbone> backbone_;
  std::unique_ptr<VitalEmbedding> vital_;
  std::unique_ptr<LabEmbedding> lab_;
  std::unique_ptr<MixerHead> mixer_;
  ParameterStore store_;
};

}  // namespace vital

#endif  // VITAL_MODEL_H_
