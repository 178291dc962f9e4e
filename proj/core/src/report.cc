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

#include "vital/report.h"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace vital {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string MetricsReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["protocol"] = protocol;
  ordered_json settings_json = ordered_json::object();
  for (const auto& [k, v] : settings) settings_json[k] = v;
  j["settings"] = settings_json;
  ordered_json splits_json = ordered_json::array();
  for (const auto& s : splits) {
    splits_json.push_back({{"split", s.split},
                           {"auroc", s.auroc},
                           {"auprc", s.auprc},
                           {"count", s.count},
                           {"positives", s.positives}});
  }
  j["splits"] = splits_json;
  ordered_json groups_json = ordered_json::array();
  for (const auto& g : groups) {
    groups_json.push_back({{"label", g.label},
                           {"seeds", g.seeds},
                           {"auroc", g.auroc},
                           {"auprc", g.auprc},
                           {"auroc_mean", mean_of(g.auroc)},
                           {"auroc_std", sample_stddev(g.auroc)},
                           {"auprc_mean", mean_of(g.auprc)},
                           {"auprc_std", sample_stddev(g.auprc)}});
  }
  j["groups"] = groups_json;
  ordered_json ref = ordered_json::object();
  for (const auto& [k, v] : reference) ref[k] = v;
  j["reference"] = ref;
  return j.dump(2) + "\n";
}

void MetricsReport::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json();
}

}  // namespace vital
