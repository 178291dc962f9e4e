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

#include "vital/experiments.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "vital/metrics.h"

namespace vital {

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<std::size_t> top_k(const std::vector<double>& v, std::size_t k) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  idx.resize(std::min(k, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::size_t overlap(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  return both.size();
}

}  // namespace

std::vector<std::size_t> sensor_removal_order(const Dataset& dataset,
                                              const std::vector<std::size_t>& indices) {
  const std::size_t p_count = dataset.manifest.num_variables();
  const int positive = dataset.manifest.num_classes - 1;
  std::vector<int> labels;
  for (std::size_t i : indices) labels.push_back(dataset.records.at(i).label == positive ? 1 : 0);
  std::vector<double> score(p_count, 0.0);
  for (std::size_t p = 0; p < p_count; ++p) {
    std::vector<double> means(indices.size(), 0.0);
    std::vector<std::uint8_t> have(indices.size(), 0);
    double total = 0.0;
    std::size_t n_obs = 0;
    for (std::size_t j = 0; j < indices.size(); ++j) {
      const auto obs = dataset.records[indices[j]].observed_values(p);
      if (obs.empty()) continue;
      means[j] = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(obs.size());
      have[j] = 1;
      total += means[j];
      ++n_obs;
    }
    const double fill = n_obs > 0 ? total / static_cast<double>(n_obs) : 0.0;
    for (std::size_t j = 0; j < indices.size(); ++j)
      if (!have[j]) means[j] = fill;
    score[p] = std::abs(auroc(means, labels) - 0.5);
  }
  std::vector<std::size_t> order(p_count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return order;
}

void RobustnessProtocol::validate(std::size_t num_variables) const {
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  bool permutation = sorted.size() == num_variables;
  for (std::size_t i = 0; permutation && i < sorted.size(); ++i) permutation = sorted[i] == i;
  if (!permutation) {
    throw std::invalid_argument("removal order is not a permutation of the " +
                                std::to_string(num_variables) + " variables");
  }
  for (double r : ratios)
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("removal ratios must lie in [0,1]");
}

std::vector<std::size_t> removed_variables(const RobustnessProtocol& protocol, double ratio,
                                           const Partition& partition,
                                           std::size_t num_variables) {
  protocol.validate(num_variables);
  // The small slack keeps e.g. 0.1 * 20 from rounding up to 3.
  auto count = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(num_variables) - 1e-9));
  std::vector<std::size_t> out;
  if (protocol.lab_only) {
    const std::set<std::size_t> labs(partition.labs.begin(), partition.labs.end());
    count = std::min(count, labs.size());
    for (std::size_t p : protocol.order) {
      if (out.size() >= count) break;
      if (labs.count(p)) out.push_back(p);
    }
  } else {
    out.assign(protocol.order.begin(),
               protocol.order.begin() + static_cast<std::ptrdiff_t>(std::min(count, num_variables)));
  }
  return out;
}

std::vector<RobustnessPoint> leave_fixed_sensors_out(const VitalModel& model,
                                                     const Dataset& dataset,
                                                     const std::vector<std::size_t>& test,
                                                     const Normalizer& normalizer,
                                                     const RobustnessProtocol& protocol,
                                                     std::size_t threads) {
  std::vector<RobustnessPoint> out;
  for (double ratio : protocol.ratios) {
    RobustnessPoint pt;
    pt.ratio = ratio;
    pt.removed = removed_variables(protocol, ratio, dataset.manifest.partition,
                                   dataset.manifest.num_variables());
    const auto inputs = prepare_inputs(dataset, test, normalizer, pt.removed);
    pt.metrics = evaluate(model, inputs, "test", threads);
    out.push_back(std::move(pt));
  }
  return out;
}

std::vector<EmbeddingPoint> lab_embedding_points(const VitalModel& model,
                                                 const std::vector<ModelInput>& inputs,
                                                 const std::vector<std::string>& lab_names,
                                                 std::size_t max_points) {
  const auto& lab = model.lab_embedding();
  const auto& store = model.parameters();
  std::vector<EmbeddingPoint> out;
  for (const auto& in : inputs) {
    for (std::size_t l = 0; l < in.labs.size() && out.size() < max_points; ++l) {
      if (!in.labs[l]) continue;
      const Tensor e = lab.embed_lab(store, l, in.labs[l]);
      out.push_back({"measured", l < lab_names.size() ? lab_names[l] : std::to_string(l),
                     {e.data().begin(), e.data().end()}});
    }
    if (out.size() >= max_points) break;
  }
  const auto tok = store.get("lab.nm_token").data();
  out.push_back({"not_measured", "*", {tok.begin(), tok.end()}});
  return out;
}

SeparationDiagnostic separation_diagnostic(const VitalModel& model,
                                           const std::vector<ModelInput>& inputs,
                                           std::size_t k, std::size_t max_points) {
  const auto points = lab_embedding_points(model, inputs, {}, max_points);
  SeparationDiagnostic d;
  const auto& token = points.back().embedding;
  std::vector<double> to_token;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    to_token.push_back(distance(points[i].embedding, token));
  }
  d.measured_points = to_token.size();
  if (to_token.size() < 2) throw std::invalid_argument("too few measured lab embeddings");
  std::sort(to_token.begin(), to_token.end());
  d.token_nearest_distance = to_token.front();
  const std::size_t kk = std::min(k, to_token.size());
  d.token_knn_distance =
      std::accumulate(to_token.begin(), to_token.begin() + static_cast<std::ptrdiff_t>(kk), 0.0) /
      static_cast<double>(kk);
  std::vector<double> pairwise;
  pairwise.reserve(d.measured_points * (d.measured_points - 1) / 2);
  for (std::size_t i = 0; i < d.measured_points; ++i)
    for (std::size_t j = i + 1; j < d.measured_points; ++j)
      pairwise.push_back(distance(points[i].embedding, points[j].embedding));
  const std::size_t mid = pairwise.size() / 2;
  std::nth_element(pairwise.begin(), pairwise.begin() + static_cast<std::ptrdiff_t>(mid),
                   pairwise.end());
  double median = pairwise[mid];
  if (pairwise.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(pairwise.begin(),
                                               pairwise.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  d.median_pairwise_distance = median;
  d.separated = d.token_knn_distance > d.median_pairwise_distance;
  return d;
}

AttentionOverlap attention_overlap(const VitalModel& model,
                                   const std::vector<ModelInput>& inputs,
                                   const std::vector<std::size_t>& vitals, std::size_t k,
                                   std::size_t permutations, std::uint64_t seed) {
  if (vitals.size() < 2) throw std::invalid_argument("attention_overlap needs two or more vitals");
  const auto& emb = model.vital_embedding();
  const std::size_t gp = emb.config().num_prototypes;
  std::vector<std::vector<std::vector<double>>> profiles;  // patient -> vital -> [G']
  for (const auto& in : inputs) {
    std::vector<std::vector<double>> per_vital;
    for (std::size_t v : vitals) {
      const std::size_t t = in.steps;
      std::span<const double> x(in.vital_values.data() + v * t, t);
      std::span<const std::uint8_t> m(in.vital_mask.data() + v * t, t);
      const std::size_t observed = static_cast<std::size_t>(std::count(m.begin(), m.end(), 1));
      if (observed == 0) break;
      const auto att = emb.attention_map(model.parameters(), x, m);
      std::vector<double> mean(gp, 0.0);
      for (std::size_t s = 0; s < t; ++s)
        if (m[s])
          for (std::size_t g = 0; g < gp; ++g) mean[g] += att[s][g] / static_cast<double>(observed);
      per_vital.push_back(std::move(mean));
    }
    if (per_vital.size() == vitals.size()) profiles.push_back(std::move(per_vital));
  }
  AttentionOverlap out;
  out.patients = profiles.size();
  if (profiles.empty()) return out;
  auto statistic = [&](const std::vector<std::vector<std::vector<double>>>& prof) {
    double total = 0.0;
    std::size_t pairs = 0;
    for (const auto& pv : prof) {
      std::vector<std::vector<std::size_t>> tops;
      for (const auto& v : pv) tops.push_back(top_k(v, k));
      for (std::size_t a = 0; a < tops.size(); ++a)
        for (std::size_t b = a + 1; b < tops.size(); ++b) {
          total += static_cast<double>(overlap(tops[a], tops[b]));
          ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
  };
  out.observed = statistic(profiles);
  std::mt19937_64 rng(seed);
  double chance = 0.0;
  for (std::size_t r = 0; r < permutations; ++r) {
    auto shuffled = profiles;
    for (auto& pv : shuffled)
      for (auto& v : pv) std::shuffle(v.begin(), v.end(), rng);
    chance += statistic(shuffled);
  }
  out.chance = permutations > 0 ? chance / static_cast<double>(permutations) : 0.0;
  return out;
}

}  // namespace vital
