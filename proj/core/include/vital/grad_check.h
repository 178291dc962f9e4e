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

#ifndef VITAL_GRAD_CHECK_H_
#define VITAL_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vital/parameter_store.h"
#include "vital/tensor.h"

namespace vital {

struct GradCheckOptions {
  double eps = 1e-5;
  // Coordinates sampled per tensor; 0 checks every coordinate.
  std::size_t coords_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_frozen = 0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Compares tape gradients of a scalar function with central differences,
// using |analytic - numeric| / max(|analytic|, |numeric|, 1e-12). Tensors that
// do not require a gradient are skipped. Throws when two evaluations of fn
// disagree.
GradCheckResult grad_check(const std::function<Tensor()>& fn,
                           std::vector<NamedTensor> params,
                           const GradCheckOptions& options = {});

GradCheckResult grad_check(const std::function<Tensor()>& fn,
                           ParameterStore& params,
                           const GradCheckOptions& options = {});

}  // namespace vital

#endif  // VITAL_GRAD_CHECK_H_
