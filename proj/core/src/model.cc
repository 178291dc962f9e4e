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

#include "vital/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "vital/ops.h"

namespace vital {

ModelLayout ModelLayout::from_manifest(const DatasetManifest& manifest) {
  ModelLayout layout;
  layout.num_vitals = manifest.partition.vitals.size();
  layout.num_labs = manifest.partition.labs.size();
  layout.demo_dim = manifest.demo_dim();
  layout.max_steps = manifest.max_steps;
  layout.num_classes = manifest.num_classes;
  return layout;
}

ModelInput make_input(const PatientRecord& record, const Partition& partition) {
  ModelInput in;
  in.steps = record.num_steps;
  const std::size_t t_max = record.num_steps;
  in.vital_values.assign(partition.vitals.size() * t_max, 0.0);
  in.vital_mask.assign(partition.vitals.size() * t_max, 0);
  for (std::size_t v = 0; v < partition.vitals.size(); ++v) {
    const std::size_t p = partition.vitals[v];
    for (std::size_t t = 0; t < t_max; ++t) {
      if (record.observed(t, p)) {
        in.vital_values[v * t_max + t] = record.value(t, p);
        in.vital_mask[v * t_max + t] = 1;
      }
    }
  }
  for (std::size_t p : partition.labs) {
    const auto obs = record.observed_values(p);
    if (obs.empty()) {
      in.labs.emplace_back(std::nullopt);
    } else {
      in.labs.emplace_back(representative_stats(obs));
    }
  }
  in.demographics = record.demographics;
  in.label = record.label;
  return in;
}

PatientRecord mask_variables(const PatientRecord& record,
                             const std::vector<std::size_t>& variables) {
  PatientRecord out = record;
  for (std::size_t p : variables) {
    if (p >= out.num_variables) {
      throw std::out_of_range("variable " + std::to_string(p) + " outside " +
                              std::to_string(out.num_variables));
    }
    for (std::size_t t = 0; t < out.num_steps; ++t) {
      out.values[t * out.num_variables + p] = kMissing;
      out.mask[t * out.num_variables + p] = 0;
    }
  }
  return out;
}

std::vector<ModelInput> prepare_inputs(const Dataset& dataset,
                                       const std::vector<std::size_t>& indices,
                                       const Normalizer& normalizer,
                                       const std::vector<std::size_t>& removed) {
  std::vector<ModelInput> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    PatientRecord r = truncate_front(dataset.records.at(i), dataset.manifest.max_steps);
    if (!removed.empty()) r = mask_variables(r, removed);
    r = pad_left(normalizer.apply(r), dataset.manifest.max_steps);
    out.push_back(make_input(r, dataset.manifest.partition));
  }
  return out;
}

VitalModel::VitalModel(ModelConfig config, ModelLayout layout, std::uint64_t seed)
    : config_(std::move(config)), layout_(layout) {
  config_.backbone.validate();
  if (layout_.max_steps > config_.backbone.max_context) {
    throw std::invalid_argument("max_steps " + std::to_string(layout_.max_steps) +
                                " exceeds backbone context " +
                                std::to_string(config_.backbone.max_context));
  }
  backbone_ = std::make_unique<Backbone>(config_.backbone,
                                         Vocabulary::standard(config_.backbone.vocab_size));
  vital_ = std::make_unique<VitalEmbedding>(config_.reprogramming, backbone_.get());
  const std::size_t s = config_.reprogramming.embed_dim;
  lab_ = std::make_unique<LabEmbedding>(layout_.num_labs, s, config_.nm_mode);
  mixer_ = std::make_unique<MixerHead>(layout_.num_vitals + layout_.num_labs, s,
                                       layout_.demo_dim, layout_.num_classes);
  backbone_->init_frozen(store_);
  if (config_.pretrain_steps > 0) {
    backbone_->pretrain_on_corpus(store_, config_.pretrain_steps, config_.backbone.seed);
  }
  std::mt19937_64 rng(seed);
  vital_->init(store_, rng);
  lab_->init(store_, rng);
  mixer_->init(store_, rng);
}

void VitalModel::set_missing_word(const std::string& word) {
  vital_->set_missing_word(word);
  config_.reprogramming.missing_word = word;
}

ForwardTrace VitalModel::trace(const ParameterStore& store, const ModelInput& input) const {
  ForwardTrace tr;
  if (input.vital_values.size() != layout_.num_vitals * input.steps ||
      input.labs.size() != layout_.num_labs) {
    throw ShapeError("input with " + std::to_string(input.vital_values.size()) +
                     " vital cells and " + std::to_string(input.labs.size()) +
                     " labs does not match the model layout");
  }
  tr.vital_context = vital_->embed(store, input.vital_values, input.vital_mask,
                                   layout_.num_vitals);
  tr.lab_context = lab_->embed(store, input.labs);
  Tensor h;
  if (tr.vital_context && tr.lab_context) {
    h = ops::concat({*tr.vital_context, *tr.lab_context}, 0);
  } else {
    h = tr.vital_context ? *tr.vital_context : *tr.lab_context;
  }
  tr.mixed = mixer_->mix(store, h);
  tr.representation = mixer_->fuse(store, tr.mixed, input.demographics);
  tr.logits = mixer_->classify(store, tr.representation);
  return tr;
}

Tensor VitalModel::logits(const ParameterStore& store, const ModelInput& input) const {
  return trace(store, input).logits;
}

Tensor VitalModel::loss(const ParameterStore& store, const ModelInput& input,
                        double pos_weight) const {
  return mixer_->loss(logits(store, input), input.label, pos_weight);
}

std::vector<Tensor> VitalModel::logits_batch(const ParameterStore& store,
                                             std::span<const ModelInput* const> inputs) const {
  const std::size_t nv = layout_.num_vitals;
  std::optional<Tensor> vitals;
  if (nv > 0 && !inputs.empty()) {
    std::vector<double> x;
    std::vector<std::uint8_t> m;
    for (const ModelInput* in : inputs) {
      if (in->vital_values.size() != nv * in->steps || in->steps != inputs[0]->steps) {
        throw ShapeError("batched inputs disagree with the model layout");
      }
      x.insert(x.end(), in->vital_values.begin(), in->vital_values.end());
      m.insert(m.end(), in->vital_mask.begin(), in->vital_mask.end());
    }
    vitals = vital_->embed(store, x, m, nv * inputs.size());
  }
  std::vector<Tensor> out;
  out.reserve(inputs.size());
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    const ModelInput& in = *inputs[b];
    const auto labs = lab_->embed(store, in.labs);
    Tensor h;
    if (vitals) {
      const Tensor hv = ops::slice_rows(*vitals, b * nv, nv);
      h = labs ? ops::concat({hv, *labs}, 0) : hv;
    } else {
      h = *labs;
    }
    const Tensor mixed = mixer_->mix(store, h);
    out.push_back(mixer_->classify(store, mixer_->fuse(store, mixed, in.demographics)));
  }
  return out;
}

Tensor VitalModel::loss_batch(const ParameterStore& store,
                              std::span<const ModelInput* const> inputs,
                              double pos_weight) const {
  const auto logits = logits_batch(store, inputs);
  std::vector<Tensor> losses;
  losses.reserve(logits.size());
  for (std::size_t b = 0; b < logits.size(); ++b) {
    losses.push_back(mixer_->loss(logits[b], inputs[b]->label, pos_weight));
  }
  return batch_loss(losses);
}

double VitalModel::score(const ModelInput& input) const {
  const Tensor l = logits(store_, input);
  if (l.size() == 1) return l.at(0);
  const auto v = l.data();
  const double mx = *std::max_element(v.begin(), v.end());
  double denom = 0.0;
  for (double x : v) denom += std::exp(x - mx);
  return std::exp(v.back() - mx) / denom;
}

void VitalModel::load_parameters(const ParameterStore& checkpoint) {
  if (checkpoint.size() != store_.size()) {
    throw std::invalid_argument("checkpoint holds " + std::to_string(checkpoint.size()) +
                                " entries, model expects " + std::to_string(store_.size()));
  }
  for (const auto& e : store_.entries()) {
    if (!checkpoint.contains(e.name)) {
      throw std::invalid_argument("checkpoint lacks parameter " + e.name);
    }
    const Tensor& c = checkpoint.get(e.name);
    if (c.shape() != e.tensor.shape()) {
      throw ShapeError("checkpoint parameter " + e.name + " has shape " +
                       shape_to_string(c.shape()) + ", model expects " +
                       shape_to_string(e.tensor.shape()));
    }
    if (checkpoint.is_frozen(e.name) != e.frozen) {
      throw std::invalid_argument("checkpoint parameter " + e.name + " differs in frozen flag");
    }
  }
  store_.copy_values_from(checkpoint);
}

}  // namespace vital
