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

#include "vital/svg.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace vital {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::ofstream open_svg(const std::filesystem::path& path, double width, double height) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_heatmap_svg(const std::vector<std::vector<double>>& matrix, const std::string& title,
                       const std::filesystem::path& path) {
  const std::size_t rows = matrix.size();
  const std::size_t cols = rows ? matrix[0].size() : 0;
  constexpr double kCell = 6.0, kMargin = 40.0;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : matrix)
    for (double v : r) lo = std::min(lo, v), hi = std::max(hi, v);
  const double span = hi > lo ? hi - lo : 1.0;
  auto out = open_svg(path, 2 * kMargin + kCell * static_cast<double>(cols),
                      2 * kMargin + kCell * static_cast<double>(rows));
  out << "<text x=\"" << kMargin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape(title) << "</text>\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - (matrix[r][c] - lo) / span)));
      out << "<rect x=\"" << kMargin + kCell * static_cast<double>(c) << "\" y=\""
          << kMargin + kCell * static_cast<double>(r) << "\" width=\"" << kCell
          << "\" height=\"" << kCell << "\" fill=\"rgb(" << shade << ',' << shade << ','
          << shade << ")\"/>\n";
    }
  }
  out << "<text x=\"" << kMargin << "\" y=\"" << 2 * kMargin + kCell * static_cast<double>(rows) - 10
      << "\" font-family=\"sans-serif\" font-size=\"10\">prototype (x) by time step (y)</text>\n";
  out << "</svg>\n";
}

void write_scatter_svg(const std::vector<ScatterPoint>& points,
                       const std::vector<std::string>& group_names, const std::string& title,
                       const std::filesystem::path& path) {
  constexpr double kSize = 400.0, kMargin = 40.0;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& p : points) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  const double sx = x1 > x0 ? x1 - x0 : 1.0;
  const double sy = y1 > y0 ? y1 - y0 : 1.0;
  auto out = open_svg(path, kSize + 2 * kMargin + 120, kSize + 2 * kMargin);
  out << "<text x=\"" << kMargin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape(title) << "</text>\n";
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kSize
      << "\" height=\"" << kSize << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& p : points) {
    const double cx = kMargin + kSize * (p.x - x0) / sx;
    const double cy = kMargin + kSize * (1.0 - (p.y - y0) / sy);
    out << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"2.5\" fill=\""
        << kPalette[static_cast<std::size_t>(p.group) % std::size(kPalette)]
        << "\" fill-opacity=\"0.7\"/>\n";
  }
  for (std::size_t g = 0; g < group_names.size(); ++g) {
    const double y = kMargin + 16.0 * static_cast<double>(g);
    out << "<circle cx=\"" << kSize + kMargin + 16 << "\" cy=\"" << y << "\" r=\"4\" fill=\""
        << kPalette[g % std::size(kPalette)] << "\"/>\n"
        << "<text x=\"" << kSize + kMargin + 26 << "\" y=\"" << y + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(group_names[g])
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace vital
