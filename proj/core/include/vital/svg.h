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

#ifndef VITAL_SVG_H_
#define VITAL_SVG_H_

#include <filesystem>
#include <string>
#include <vector>

namespace vital {

// Rows of equal length drawn as a grid of grey-scale cells (darker = larger).
void write_heatmap_svg(const std::vector<std::vector<double>>& matrix, const std::string& title,
                       const std::filesystem::path& path);

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  int group = 0;
};

// 2-D scatter with one colour per group and a legend.
void write_scatter_svg(const std::vector<ScatterPoint>& points,
                       const std::vector<std::string>& group_names, const std::string& title,
                       const std::filesystem::path& path);

}  // namespace vital

#endif  // VITAL_SVG_H_
