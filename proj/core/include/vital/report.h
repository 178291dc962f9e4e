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

#ifndef VITAL_REPORT_H_
#define VITAL_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vital/train.h"

namespace vital {

// Per-seed values of one setting with their mean and sample standard
// deviation (zero for a single seed).
struct MetricsGroup {
  std::string label;
  std::vector<std::uint64_t> seeds;
  std::vector<double> auroc;
  std::vector<double> auprc;
};

struct MetricsReport {
  std::string protocol;
  std::vector<std::pair<std::string, std::string>> settings;
  std::vector<SplitMetrics> splits;
  std::vector<MetricsGroup> groups;
  // Published reference numbers kept for comparison only.
  std::vector<std::pair<std::string, double>> reference;

  // Deterministic serialization; holds no timing or host data.
  std::string to_json() const;
  void write(const std::filesystem::path& path) const;
};

double mean_of(const std::vector<double>& v);
double sample_stddev(const std::vector<double>& v);

}  // namespace vital

#endif  // VITAL_REPORT_H_
