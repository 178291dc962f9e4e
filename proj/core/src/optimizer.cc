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

#include "vital/optimizer.h"

#include <cmath>
#include <stdexcept>

namespace vital {

void Adam::update(const std::string& name, Tensor& param,
                  std::span<const double> grad, double c1, double c2) {
  auto values = param.mutable_data();
  if (grad.size() != values.size()) {
    throw ShapeError("Adam: gradient size mismatch for " + name);
  }
  auto& m = first_[name];
  auto& v = second_[name];
  if (m.empty()) {
    m.assign(values.size(), 0.0);
    v.assign(values.size(), 0.0);
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  for (std::size_t i = 0; i < values.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
    v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    values[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
  }
}

void Adam::step(ParameterStore& store) {
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (const auto& e : store.entries()) {
    if (e.frozen) continue;
    const std::vector<double> g = e.tensor.grad();
    update(e.name, store.get(e.name), g, c1, c2);
  }
}

void Adam::step(ParameterStore& store,
                const std::unordered_map<std::string, std::vector<double>>& grads) {
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (const auto& e : store.entries()) {
    if (e.frozen) continue;
    auto it = grads.find(e.name);
    if (it == grads.end()) continue;
    update(e.name, store.get(e.name), it->second, c1, c2);
  }
}

}  // namespace vital
