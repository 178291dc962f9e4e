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

#ifndef VITAL_METRICS_H_
#define VITAL_METRICS_H_

#include <cstddef>
#include <span>
#include <vector>

namespace vital {

// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values);

// P(score+ > score-) + P(tie) / 2. Throws std::invalid_argument unless both
// classes are present. Labels are {0,1}.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Average precision by threshold enumeration: scores are grouped by distinct
// value in descending order and each group contributes
// (recall gain) * (precision after the group). Tied scores therefore share one
// operating point. Throws when there are no positives.
double auprc(std::span<const double> scores, std::span<const int> labels);

// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct PcaResult {
  std::vector<double> mean;
  // k rows of length dim, orthonormal.
  std::vector<std::vector<double>> components;
  std::vector<double> variances;
  // n rows of length k.
  std::vector<std::vector<double>> coordinates;
};

// Centered PCA by power iteration with deflation on the covariance matrix.
// Each component is signed so its largest-magnitude entry is positive.
// Needs at least k + 1 vectors; throws on zero total variance.
PcaResult pca_project(const std::vector<std::vector<double>>& vectors, std::size_t k = 2);

}  // namespace vital

#endif  // VITAL_METRICS_H_
