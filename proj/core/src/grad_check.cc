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

#include "vital/grad_check.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace vital {

namespace {

double evaluate(const std::function<Tensor()>& fn) {
  Tensor out = fn();
  return out.item();
}

}  // namespace

GradCheckResult grad_check(const std::function<Tensor()>& fn,
                           std::vector<NamedTensor> params,
                           const GradCheckOptions& options) {
  if (!(options.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double first = evaluate(fn);
  const double second = evaluate(fn);
  if (std::bit_cast<std::uint64_t>(first) != std::bit_cast<std::uint64_t>(second)) {
    throw std::runtime_error("grad_check: function is not deterministic");
  }

  GradCheckResult result;
  std::vector<NamedTensor> active;
  for (auto& p : params) {
    if (p.tensor.requires_grad()) {
      p.tensor.zero_grad();
      active.push_back(p);
    } else {
      ++result.skipped_frozen;
    }
  }
  if (active.empty()) return result;

  {
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = fn();
    tape.backward(loss);
  }

  std::mt19937_64 rng(options.seed);
  for (auto& p : active) {
    const std::vector<double> analytic = p.tensor.grad();
    std::vector<std::size_t> coords(p.tensor.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.coords_per_tensor > 0 && coords.size() > options.coords_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    auto values = p.tensor.mutable_data();
    for (std::size_t i : coords) {
      const double saved = values[i];
      values[i] = saved + options.eps;
      const double plus = evaluate(fn);
      values[i] = saved - options.eps;
      const double minus = evaluate(fn);
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      const double denom =
          std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
      const double err = std::abs(analytic[i] - numeric) / denom;
      ++result.checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_tensor = p.name;
        result.worst_index = i;
      }
    }
    p.tensor.zero_grad();
  }
  return result;
}

GradCheckResult grad_check(const std::function<Tensor()>& fn,
                           ParameterStore& params,
                           const GradCheckOptions& options) {
  std::vector<NamedTensor> list;
  for (const auto& e : params.entries()) list.push_back({e.name, e.tensor});
  return grad_check(fn, std::move(list), options);
}

}  // namespace vital
