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

#ifndef VITAL_OPTIMIZER_H_
#define VITAL_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vital/parameter_store.h"

namespace vital {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moments exist only for non-frozen entries.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update from the gradients currently held by the store.
  void step(ParameterStore& store);
  // Same, with externally accumulated gradients (name -> flat gradient).
  void step(ParameterStore& store,
            const std::unordered_map<std::string, std::vector<double>>& grads);

  std::uint64_t steps() const { return steps_; }
  bool has_state(const std::string& name) const { return first_.count(name) > 0; }
  std::size_t state_entries() const { return first_.size(); }

 private:
  void update(const std::string& name, Tensor& param,
              std::span<const double> grad, double c1, double c2);

  AdamConfig config_;
  std::uint64_t steps_ = 0;
  std::unordered_map<std::string, std::vector<double>> first_;
  std::unordered_map<std::string, std::vector<double>> second_;
};

}  // namespace vital

#endif  // VITAL_OPTIMIZER_H_
