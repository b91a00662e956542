//
// Copyright 2026 The evdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "evdp/harness/svg.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_replace.h"

namespace evdp::harness {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 480;
constexpr double kLeft = 80;
constexpr double kRight = 200;
constexpr double kTop = 40;
constexpr double kBottom = 60;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                    "#bcbd22", "#17becf"};

std::string Escape(const std::string& text) {
  return absl::StrReplaceAll(
      text, {{"&", "&amp;"}, {"<", "&lt;"}, {">", "&gt;"}, {"\"", "&quot;"}});
}

std::string Num(double v) { return absl::StrFormat("%.2f", v); }

}  // namespace

absl::StatusOr<std::string> RenderLinePlot(const CsvTable& table,
                                           const PlotSpec& spec) {
  auto x_index = table.ColumnIndex(spec.x_column);
  if (!x_index.ok()) return x_index.status();
  auto y_index = table.ColumnIndex(spec.y_column);
  if (!y_index.ok()) return y_index.status();
  std::vector<int> series_index;
  for (const std::string& name : spec.series_columns) {
    auto index = table.ColumnIndex(name);
    if (!index.ok()) return index.status();
    series_index.push_back(*index);
  }

  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& row : table.rows()) {
    auto x = ParseDouble(row[*x_index]);
    auto y = ParseDouble(row[*y_index]);
    if (!x.ok() || !y.ok() || !std::isfinite(*x) || !std::isfinite(*y)) {
      continue;
    }
    if (spec.log_x && !(*x > 0)) continue;
    std::vector<std::string> key;
    for (size_t i = 0; i < series_index.size(); ++i) {
      key.push_back(
          absl::StrCat(spec.series_columns[i], "=", row[series_index[i]]));
    }
    series[absl::StrJoin(key, " ")].emplace_back(
        spec.log_x ? std::log10(*x) : *x, *y);
  }

  double x_min = HUGE_VAL, x_max = -HUGE_VAL;
  double y_min = HUGE_VAL, y_max = -HUGE_VAL;
  for (auto& [name, points] : series) {
    std::sort(points.begin(), points.end());
    for (const auto& [x, y] : points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (series.empty()) {
    x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  }
  if (x_max == x_min) x_min -= 0.5, x_max += 0.5;
  if (y_max == y_min) y_min -= 0.5, y_max += 0.5;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) {
    return kTop + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
  };

  std::string svg = absl::StrFormat(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      static_cast<int>(kWidth), static_cast<int>(kHeight));
  absl::StrAppend(&svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  absl::StrAppend(&svg, "<text x=\"", Num(kWidth / 2 - kRight / 2),
                  "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">",
                  Escape(spec.title), "</text>\n");
  // Axes.
  absl::StrAppend(&svg, "<line x1=\"", Num(kLeft), "\" y1=\"",
                  Num(kTop + plot_h), "\" x2=\"", Num(kLeft + plot_w),
                  "\" y2=\"", Num(kTop + plot_h), "\" stroke=\"black\"/>\n");
  absl::StrAppend(&svg, "<line x1=\"", Num(kLeft), "\" y1=\"", Num(kTop),
                  "\" x2=\"", Num(kLeft), "\" y2=\"", Num(kTop + plot_h),
                  "\" stroke=\"black\"/>\n");
  for (int t = 0; t <= 4; ++t) {
    const double xv = x_min + (x_max - x_min) * t / 4;
    const double yv = y_min + (y_max - y_min) * t / 4;
    const std::string x_text =
        absl::StrFormat("%.4g", spec.log_x ? std::pow(10.0, xv) : xv);
    absl::StrAppend(&svg, "<text x=\"", Num(px(xv)), "\" y=\"",
                    Num(kTop + plot_h + 18), "\" text-anchor=\"middle\">",
                    x_text,
                    "</text>\n");
    absl::StrAppend(&svg, "<text x=\"", Num(kLeft - 6), "\" y=\"",
                    Num(py(yv) + 4), "\" text-anchor=\"end\">",
                    absl::StrFormat("%.4g", yv), "</text>\n");
  }
  absl::StrAppend(&svg, "<text x=\"", Num(kLeft + plot_w / 2), "\" y=\"",
                  Num(kHeight - 16), "\" text-anchor=\"middle\">",
                  Escape(spec.log_x ? spec.x_column + " (log scale)"
                                    : spec.x_column),
                  "</text>\n");
  absl::StrAppend(&svg, "<text x=\"18\" y=\"", Num(kTop + plot_h / 2),
                  "\" text-anchor=\"middle\" transform=\"rotate(-90 18 ",
                  Num(kTop + plot_h / 2), ")\">", Escape(spec.y_column),
                  "</text>\n");

  int color = 0;
  for (const auto& [name, points] : series) {
    const char* stroke = kPalette[color % std::size(kPalette)];
    std::vector<std::string> coords;
    for (const auto& [x, y] : points) {
      coords.push_back(absl::StrCat(Num(px(x)), ",", Num(py(y))));
    }
    absl::StrAppend(&svg, "<polyline fill=\"none\" stroke=\"", stroke,
                    "\" stroke-width=\"1.5\" points=\"",
                    absl::StrJoin(coords, " "), "\"/>\n");
    const double ly = kTop + 14 + 16 * color;
    absl::StrAppend(&svg, "<line x1=\"", Num(kWidth - kRight + 10), "\" y1=\"",
                    Num(ly - 4), "\" x2=\"", Num(kWidth - kRight + 30),
                    "\" y2=\"", Num(ly - 4), "\" stroke=\"", stroke,
                    "\" stroke-width=\"2\"/>\n");
    absl::StrAppend(&svg, "<text x=\"", Num(kWidth - kRight + 34), "\" y=\"",
                    Num(ly), "\" font-size=\"10\">", Escape(name), "</text>\n");
    ++color;
  }
  absl::StrAppend(&svg, "</svg>\n");
  return svg;
}

}  // namespace evdp::harness
