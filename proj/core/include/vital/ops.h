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

#ifndef VITAL_OPS_H_
#define VITAL_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "vital/tensor.h"

// Differentiable primitives. Every op validates shapes (ShapeError naming both
// shapes) and rejects non-finite outputs (NumericError naming op and index).
namespace vital::ops {

// [m,k] x [k,n] -> [m,n].
Tensor matmul(const Tensor& a, const Tensor& b);

// Same-shape sum, or b a vector matching a's last dim (bias broadcast).
Tensor add(const Tensor& a, const Tensor& b);

// Same-shape Hadamard product.
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double factor);

// Softmax over the last axis. With causal set, a square [T,T] input is
// treated as attention scores and entries above the diagonal get probability
// zero without being read.
Tensor softmax_last_axis(const Tensor& a, bool causal = false);

// Normalizes rows over the last axis, then applies gain and bias vectors.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);

// Exact erf-based GELU.
Tensor gelu(const Tensor& a);

// Concatenation of rank-2 tensors along axis 0 or 1 (rank-1 along axis 0).
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis);

// Box slice with per-axis begin and extent.
Tensor slice(const Tensor& a, std::vector<std::size_t> begin,
             std::vector<std::size_t> extent);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count);

Tensor transpose(const Tensor& a);

// Mean of all elements (rank-0 result), or along one axis of a rank-2 tensor.
Tensor mean(const Tensor& a);
Tensor mean(const Tensor& a, std::size_t axis);

// Rows of a [G,D] table selected by index -> [n,D].
Tensor embedding_gather(const Tensor& table,
                        std::span<const std::size_t> indices);

// Appends a trailing axis of size d: [] -> [d], [T] -> [T,d].
Tensor repeat_last_dim(const Tensor& a, std::size_t d);

Tensor reshape(const Tensor& a, Shape shape);

// Elementwise logistic loss on logits with {0,1} targets. Positive terms are
// multiplied by pos_weight.
Tensor binary_cross_entropy_with_logits(const Tensor& logits,
                                        std::span<const double> targets,
                                        double pos_weight = 1.0);

// -log softmax(logits)[label] for a rank-1 logit vector. Rank-0 result.
Tensor softmax_cross_entropy(const Tensor& logits, std::size_t label);

// Non-recorded helpers.
double sigmoid(double x);

}  // namespace vital::ops

#endif  // VITAL_OPS_H_
