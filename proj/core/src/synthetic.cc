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

#include "vital/synthetic.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "vital/metrics.h"
#include "vital/ops.h"

namespace vital {

namespace {

struct Channel {
  const char* name;
  double center;
  double spread;
};

constexpr Channel kVitals[] = {{"SBP", 120, 15},  {"DBP", 70, 10},   {"MAP", 87, 11},
                               {"HR", 85, 12},    {"O2Sat", 96, 2},  {"Resp", 18, 4},
                               {"Temp", 37, 0.6}, {"EtCO2", 35, 5}};
constexpr Channel kLabs[] = {{"Lactate", 2.0, 1.0},   {"WBC", 11, 4},
                             {"Creatinine", 1.2, 0.5}, {"Glucose", 130, 35},
                             {"Platelets", 220, 70},   {"BUN", 22, 10},
                             {"Potassium", 4.1, 0.5},  {"Sodium", 139, 4},
                             {"Hgb", 11, 2},           {"Bilirubin_total", 1.0, 0.6},
                             {"pH", 7.38, 0.06},       {"Chloride", 104, 4}};

constexpr double kVitalRates[] = {0.10, 0.12, 0.12, 0.05, 0.10, 0.15, 0.45, 0.55};
constexpr double kLabRates[] = {0.85, 0.85, 0.90, 0.88, 0.90, 0.90,
                                0.88, 0.90, 0.90, 0.95, 0.93, 0.92};
constexpr double kLabNever[] = {0.20, 0.15, 0.20, 0.20, 0.25, 0.25,
                                0.30, 0.30, 0.35, 0.40, 0.45, 0.50};

constexpr double kArCoefficient = 0.8;
constexpr double kArNoise = 0.15;
constexpr double kBaseSpread = 0.3;

Channel channel(const Channel* table, std::size_t table_size, std::size_t i,
                const char* prefix) {
  if (i < table_size) return table[i];
  static thread_local std::string name;
  name = std::string(prefix) + std::to_string(i);
  return {name.c_str(), 0.0, 1.0};
}

template <std::size_t N>
std::vector<double> profile(const std::vector<double>& given, const double (&defaults)[N],
                            std::size_t count, double fallback) {
  if (!given.empty()) return given;
  std::vector<double> out(count, fallback);
  for (std::size_t i = 0; i < std::min(count, N); ++i) out[i] = defaults[i];
  return out;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (num_patients == 0 || num_steps == 0 || num_vitals == 0 || num_labs == 0) {
    throw std::invalid_argument("synthetic counts must be positive");
  }
  if (min_valid_steps == 0 || min_valid_steps > num_steps) {
    throw std::invalid_argument("min_valid_steps must lie in [1, num_steps]");
  }
  auto check_rates = [](const std::vector<double>& rates, std::size_t n, const char* what) {
    if (!rates.empty() && rates.size() != n) {
      throw std::invalid_argument(std::string(what) + " needs one entry per variable");
    }
    for (double r : rates)
      if (!(r >= 0.0 && r <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " entries must lie in [0,1]");
      }
  };
  check_rates(vital_missing_rates, num_vitals, "vital_missing_rates");
  check_rates(lab_missing_rates, num_labs, "lab_missing_rates");
  check_rates(lab_never_measured, num_labs, "lab_never_measured");
  const double expected_pos = positive_fraction * static_cast<double>(num_patients);
  if (!(positive_fraction > 0.0 && positive_fraction < 1.0) || expected_pos < 1.0 ||
      static_cast<double>(num_patients) - expected_pos < 1.0) {
    throw std::invalid_argument("infeasible class balance: positive_fraction " +
                                std::to_string(positive_fraction) + " with " +
                                std::to_string(num_patients) + " patients");
  }
  if (!(lab_weight >= 0.0) || !std::isfinite(label_scale)) {
    throw std::invalid_argument("label_scale must be finite and lab_weight non-negative");
  }
}

SyntheticDataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  const std::size_t n = config.num_patients;
  const std::size_t steps = config.num_steps;
  const std::size_t nv = config.num_vitals;
  const std::size_t nl = config.num_labs;
  const std::size_t p = nv + nl;
  const auto vital_rates = profile(config.vital_missing_rates, kVitalRates, nv, 0.2);
  const auto lab_rates = profile(config.lab_missing_rates, kLabRates, nl, 0.9);
  const auto lab_never = profile(config.lab_never_measured, kLabNever, nl, 0.3);
  const double drift = 4.0 / static_cast<double>(steps);

  std::vector<std::mt19937_64> rngs;
  rngs.reserve(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> trend(n), level(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::seed_seq seq{config.seed, static_cast<std::uint64_t>(i)};
    rngs.emplace_back(seq);
    trend[i] = normal(rngs[i]);
    level[i] = normal(rngs[i]);
  }

  auto mean_probability = [&](double bias) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += ops::sigmoid(config.label_scale * (trend[i] + config.lab_weight * level[i]) + bias);
    return s / static_cast<double>(n);
  };
  double lo = -100.0, hi = 100.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_probability(mid) < config.positive_fraction ? lo : hi) = mid;
  }
  const double bias = 0.5 * (lo + hi);

  SyntheticDataset out;
  GroundTruth& truth = out.truth;
  truth.driver_vital = 0;
  truth.driver_lab = nv;
  if (nv >= 3) truth.coupled_triple = {0, 1, 2};
  for (std::size_t v = (nv >= 3 ? 3 : 1); v < nv; ++v) truth.noise_variables.push_back(v);
  for (std::size_t l = (nl >= 2 ? 2 : 1); l < nl; ++l) truth.noise_variables.push_back(nv + l);
  truth.label_scale = config.label_scale;
  truth.lab_weight = config.lab_weight;
  truth.bias = bias;

  Dataset& ds = out.dataset;
  for (std::size_t v = 0; v < nv; ++v) {
    ds.manifest.variables.push_back(
        {channel(kVitals, std::size(kVitals), v, "Vital").name, VariableKind::kVital, 0.0});
  }
  for (std::size_t l = 0; l < nl; ++l) {
    ds.manifest.variables.push_back(
        {channel(kLabs, std::size(kLabs), l, "Lab").name, VariableKind::kLab, 0.0});
  }
  ds.manifest.demographic_names = {"Age", "Gender"};
  ds.manifest.max_steps = steps;
  ds.manifest.num_classes = 2;

  std::uniform_int_distribution<std::size_t> length_dist(config.min_valid_steps, steps);
  for (std::size_t i = 0; i < n; ++i) {
    auto& rng = rngs[i];
    const double logit = config.label_scale * (trend[i] + config.lab_weight * level[i]) + bias;
    const int label = uniform(rng) < ops::sigmoid(logit) ? 1 : 0;
    const std::size_t len = length_dist(rng);

    std::vector<double> z(len * p, 0.0);
    auto ar_series = [&](double base, double slope) {
      std::vector<double> x(len);
      double ar = normal(rng) * kArNoise / std::sqrt(1 - kArCoefficient * kArCoefficient);
      for (std::size_t t = 0; t < len; ++t) {
        if (t > 0) ar = kArCoefficient * ar + kArNoise * normal(rng);
        x[t] = base + slope * static_cast<double>(t) + ar;
      }
      return x;
    };
    std::vector<std::vector<double>> vit(nv);
    for (std::size_t v = 0; v < nv; ++v) {
      double slope;
      if (v == 0) {
        slope = trend[i] * drift;
      } else if (v == 1 && nv >= 3) {
        slope = 0.6 * trend[i] * drift;
      } else {
        slope = normal(rng) * drift;
      }
      vit[v] = ar_series(kBaseSpread * normal(rng), slope);
    }
    std::vector<double> raw(len * p, kMissing);
    for (std::size_t v = 0; v < nv; ++v) {
      const Channel c = channel(kVitals, std::size(kVitals), v, "Vital");
      for (std::size_t t = 0; t < len; ++t) {
        double value = c.center + c.spread * vit[v][t];
        if (v == 2 && nv >= 3) {
          const double sbp = kVitals[0].center + kVitals[0].spread * vit[0][t];
          const double dbp = kVitals[1].center + kVitals[1].spread * vit[1][t];
          value = (sbp + 2.0 * dbp) / 3.0 + 0.5 * normal(rng);
        }
        const bool observed = uniform(rng) >= vital_rates[v];
        if (observed) raw[t * p + v] = value;
      }
    }
    const double secondary = 0.7 * level[i] + 0.7 * normal(rng);
    for (std::size_t l = 0; l < nl; ++l) {
      const Channel c = channel(kLabs, std::size(kLabs), l, "Lab");
      double patient_level;
      double noise;
      if (l == 0) {
        patient_level = level[i];
        noise = 0.1;
      } else if (l == 1 && nl >= 2) {
        patient_level = secondary;
        noise = 0.2;
      } else {
        patient_level = normal(rng);
        noise = 0.2;
      }
      // The driver lab is ordered more often for high levels.
      const double never_prob =
          l == 0 && config.informative_never
              ? std::min(1.0, 2.0 * lab_never[l] * ops::sigmoid(-2.0 * level[i]))
              : lab_never[l];
      const bool never = uniform(rng) < never_prob;
      const double keep = lab_never[l] < 1.0 ? (1.0 - lab_rates[l]) / (1.0 - lab_never[l]) : 0.0;
      const double start_prob = std::clamp(keep / 1.5, 0.0, 1.0);
      std::vector<std::uint8_t> measured(len, 0);
      if (!never && keep >= 1.0) {
        std::fill(measured.begin(), measured.end(), 1);
      } else if (!never) {
        for (std::size_t t = 0; t < len; ++t) {
          if (uniform(rng) < start_prob) {
            const std::size_t episode = uniform(rng) < 0.5 ? 1 : 2;
            for (std::size_t e = 0; e < episode && t + e < len; ++e) measured[t + e] = 1;
          }
        }
        if (std::none_of(measured.begin(), measured.end(), [](auto m) { return m != 0; })) {
          measured[std::uniform_int_distribution<std::size_t>(0, len - 1)(rng)] = 1;
        }
      }
      for (std::size_t t = 0; t < len; ++t) {
        const double noise_draw = normal(rng);
        if (measured[t]) {
          raw[t * p + nv + l] = c.center + c.spread * (patient_level + noise * noise_draw);
        }
      }
    }
    double age = std::clamp(62.0 + 15.0 * normal(rng), 18.0, 95.0);
    double gender = uniform(rng) < 0.5 ? 0.0 : 1.0;

    char id[24];
    std::snprintf(id, sizeof(id), "p%05zu", i);
    ds.records.push_back(
        PatientRecord::from_grid(id, p, std::move(raw), {age, gender}, label));
    truth.logits.push_back(logit);
    truth.terminal_slopes.push_back(trend[i] * drift);
    truth.lab_levels.push_back(level[i]);
  }

  const auto ratios = compute_missing_ratios(ds.records, p);
  std::vector<VariableKind> kinds;
  for (std::size_t v = 0; v < p; ++v) {
    ds.manifest.variables[v].missing_ratio = ratios[v];
    kinds.push_back(ds.manifest.variables[v].nominal_kind);
  }
  ds.manifest.partition = partition_variables(ratios, kinds, std::nullopt);
  ds.manifest.splits = split_indices(n, config.seed);
  Normalizer norm;
  norm.fit(ds.records, ds.manifest.splits.train);
  ds.manifest.normalization = norm.stats();
  return out;
}

double bayes_ceiling_auroc(const SyntheticDataset& data) {
  std::vector<int> labels;
  for (const auto& r : data.dataset.records) labels.push_back(r.label);
  return auroc(data.truth.logits, labels);
}

void write_ground_truth(const GroundTruth& truth, const std::string& path) {
  nlohmann::json j{{"driver_vital", truth.driver_vital},
                   {"driver_lab", truth.driver_lab},
                   {"coupled_triple", truth.coupled_triple},
                   {"noise_variables", truth.noise_variables},
                   {"label_scale", truth.label_scale},
                   {"lab_weight", truth.lab_weight},
                   {"bias", truth.bias},
                   {"mechanism", "logit = label_scale * (trend_z + lab_weight * level_z) + bias"},
                   {"logits", truth.logits},
                   {"terminal_slopes", truth.terminal_slopes},
                   {"lab_levels", truth.lab_levels}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace vital
