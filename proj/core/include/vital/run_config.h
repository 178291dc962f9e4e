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

#ifndef VITAL_RUN_CONFIG_H_
#define VITAL_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vital/model.h"
#include "vital/synthetic.h"
#include "vital/train.h"

namespace vital {

// Raised for invalid configuration; the message names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DatasetSource {
  std::string kind = "synthetic";  // synthetic | bundle | psv
  std::filesystem::path path;
  std::string preset = "p19";  // psv presets: p19 | p12
  SyntheticConfig synthetic;
  double partition_threshold = 0.65;
  // Explicit partition by variable name; both lists or neither.
  std::vector<std::string> vitals;
  std::vector<std::string> labs;
};

struct RobustnessSettings {
  std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5};
  bool lab_only = false;
};

struct AblationSettings {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<std::string> modes = {"trainable", "zero", "random"};
  std::vector<std::string> words = {"Missing", "Null", "Apple", "Engineering"};
};

struct RunConfig {
  DatasetSource dataset;
  ModelConfig model;
  TrainConfig train;
  RobustnessSettings robustness;
  AblationSettings ablation;
  std::filesystem::path output;

  // Unknown keys and out-of-range values throw ConfigError.
  static RunConfig from_json_text(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  // Canonical JSON carrying every field.
  std::string to_json_text() const;
  // FNV-1a of the canonical JSON without the output path and train seed.
  std::string hash() const;
  void validate() const;
};

}  // namespace vital

#endif  // VITAL_RUN_CONFIG_H_
