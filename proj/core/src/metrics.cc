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

#include "vital/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace vital {

namespace {

void check_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length: " +
                                std::to_string(scores.size()) + " vs " +
                                std::to_string(labels.size()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw std::invalid_argument("label at " + std::to_string(i) + " is not 0 or 1");
    }
    if (!std::isfinite(scores[i])) {
      throw std::invalid_argument("score at " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_binary(scores, labels);
  const auto n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("auroc needs both classes present");
  }
  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (labels[i] == 1) rank_sum += ranks[i];
  return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg);
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  check_binary(scores, labels);
  const auto n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  if (n_pos == 0) throw std::invalid_argument("auprc needs at least one positive");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0, tp = 0.0, seen = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    double group_tp = 0.0;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      group_tp += labels[order[j]];
      ++j;
    }
    tp += group_tp;
    seen += static_cast<double>(j - i);
    ap += (group_tp / n_pos) * (tp / seen);
    i = j;
  }
  return ap;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("spearman needs two equal-length series of length >= 2");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) throw std::invalid_argument("spearman of a constant series");
  return sxy / std::sqrt(sxx * syy);
}

PcaResult pca_project(const std::vector<std::vector<double>>& vectors, std::size_t k) {
  if (k == 0 || vectors.size() < k + 1) {
    throw std::invalid_argument("pca_project needs at least k + 1 vectors");
  }
  const std::size_t n = vectors.size();
  const std::size_t dim = vectors[0].size();
  if (dim < k) throw std::invalid_argument("pca_project: k exceeds dimension");
  for (const auto& v : vectors)
    if (v.size() != dim) throw std::invalid_argument("pca_project: ragged input");

  PcaResult out;
  out.mean.assign(dim, 0.0);
  for (const auto& v : vectors)
    for (std::size_t j = 0; j < dim; ++j) out.mean[j] += v[j] / static_cast<double>(n);
  std::vector<double> cov(dim * dim, 0.0);
  for (const auto& v : vectors)
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b)
        cov[a * dim + b] += (v[a] - out.mean[a]) * (v[b] - out.mean[b]);
  double trace = 0.0;
  for (std::size_t a = 0; a < dim; ++a) trace += cov[a * dim + a];
  if (trace <= 0.0) throw std::invalid_argument("pca_project: zero variance");
  for (double& c : cov) c /= static_cast<double>(n - 1);

  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> v(dim), w(dim);
    for (std::size_t j = 0; j < dim; ++j) v[j] = 1.0 + 0.01 * static_cast<double>(j * (c + 1) % 7);
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
      for (std::size_t a = 0; a < dim; ++a) {
        w[a] = 0.0;
        for (std::size_t b = 0; b < dim; ++b) w[a] += cov[a * dim + b] * v[b];
      }
      // Re-orthogonalize against earlier components to fight round-off.
      for (const auto& prev : out.components) {
        double dot = 0.0;
        for (std::size_t j = 0; j < dim; ++j) dot += w[j] * prev[j];
        for (std::size_t j = 0; j < dim; ++j) w[j] -= dot * prev[j];
      }
      double norm = 0.0;
      for (double x : w) norm += x * x;
      norm = std::sqrt(norm);
      if (norm < 1e-300) {
        std::fill(w.begin(), w.end(), 0.0);
        lambda = 0.0;
        break;
      }
      double change = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        w[j] /= norm;
        change = std::max(change, std::abs(w[j] - v[j]));
      }
      v = w;
      lambda = norm;
      if (change < 1e-14) break;
    }
    if (lambda == 0.0) {
      // Null space: take the first basis vector not spanned by earlier components.
      for (std::size_t e = 0; e < dim; ++e) {
        std::vector<double> u(dim, 0.0);
        u[e] = 1.0;
        for (const auto& prev : out.components)
          for (std::size_t j = 0; j < dim; ++j) u[j] -= prev[e] * prev[j];
        double norm = 0.0;
        for (double x : u) norm += x * x;
        if (norm > 1e-6) {
          for (double& x : u) x /= std::sqrt(norm);
          v = u;
          break;
        }
      }
    }
    std::size_t arg = 0;
    for (std::size_t j = 1; j < dim; ++j)
      if (std::abs(v[j]) > std::abs(v[arg]) + 1e-12) arg = j;
    if (v[arg] < 0)
      for (double& x : v) x = -x;
    // Rayleigh quotient for the reported variance.
    double rq = 0.0;
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) rq += v[a] * cov[a * dim + b] * v[b];
    out.components.push_back(v);
    out.variances.push_back(rq);
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) cov[a * dim + b] -= rq * v[a] * v[b];
  }
  for (const auto& vec : vectors) {
    std::vector<double> coords(k, 0.0);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j < dim; ++j)
        coords[c] += (vec[j] - out.mean[j]) * out.components[c][j];
    out.coordinates.push_back(coords);
  }
  return out;
}

}  // namespace vital
