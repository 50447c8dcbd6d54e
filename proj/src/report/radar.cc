// Copyright 2026 The Compass Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "compass/radar.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "compass/binary_io.h"
#include "compass/errors.h"

namespace compass {
namespace {

constexpr double kWidth = 640.0;
constexpr double kSize = 520.0;
constexpr double kCx = 320.0;
constexpr double kCy = 250.0;
constexpr double kRadius = 170.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  if (std::abs(v) < 5e-4) v = 0.0;
  return fmt::format("{:.3f}", v);
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Axis a points up for a = 0 and proceeds clockwise.
std::pair<double, double> point(std::size_t axis, std::size_t axes, double score) {
  const double angle = -std::numbers::pi / 2 + 2 * std::numbers::pi * axis / axes;
  const double r = kRadius * score / 5.0;
  return {kCx + r * std::cos(angle), kCy + r * std::sin(angle)};
}

std::string polygon_points(std::size_t axes, auto score_of) {
  std::string out;
  for (std::size_t a = 0; a < axes; ++a) {
    const auto [x, y] = point(a, axes, score_of(a));
    if (a) out += ' ';
    out += num(x) + "," + num(y);
  }
  return out;
}

}  // namespace

const char* direction_name(Direction d) {
  return d == Direction::kHigherBetter ? "higher-better" : "lower-better";
}

std::vector<std::vector<double>> radar_scores(const std::vector<std::vector<double>>& values,
                                              std::span<const Direction> directions) {
  if (values.empty()) throw ValidationError("radar scoring needs at least one model");
  const std::size_t axes = directions.size();
  for (const auto& row : values) {
    if (row.size() != axes) throw ValidationError("radar values do not match the axis count");
  }
  std::vector<std::vector<double>> scores(values.size(), std::vector<double>(axes));
  for (std::size_t a = 0; a < axes; ++a) {
    for (const auto& row : values) {
      if (!std::isfinite(row[a]) || row[a] < 0.0) {
        throw ValidationError(fmt::format("radar axis {} has invalid value {}", a, row[a]));
      }
      if (directions[a] == Direction::kLowerBetter && row[a] <= 0.0) {
        throw ValidationError(
            fmt::format("radar axis {} is lower-better and needs positive values, got {}", a,
                        row[a]));
      }
    }
    if (directions[a] == Direction::kHigherBetter) {
      double best = 0.0;
      for (const auto& row : values) best = std::max(best, row[a]);
      for (std::size_t m = 0; m < values.size(); ++m) {
        scores[m][a] = best == 0.0 ? 5.0 : values[m][a] == best ? 5.0 : 5.0 * values[m][a] / best;
      }
    } else {
      double best = values[0][a];
      for (const auto& row : values) best = std::min(best, row[a]);
      for (std::size_t m = 0; m < values.size(); ++m) {
        scores[m][a] = values[m][a] == best ? 5.0 : 5.0 * best / values[m][a];
      }
    }
  }
  return scores;
}

ModuleScores score_modules(std::vector<std::string> models, std::vector<std::string> axes,
                           std::vector<Direction> directions,
                           std::vector<std::vector<double>> values) {
  if (models.size() != values.size() || axes.size() != directions.size()) {
    throw ValidationError("radar inputs disagree in size");
  }
  ModuleScores out{.models = std::move(models),
                   .axes = std::move(axes),
                   .directions = std::move(directions),
                   .values = std::move(values),
                   .scores = {}};
  out.scores = radar_scores(out.values, out.directions);
  return out;
}

std::string radar_svg(const ModuleScores& s) {
  const std::size_t axes = s.axes.size();
  if (axes < 3) throw ValidationError("a radar chart needs at least three axes");
  if (s.models.empty()) throw ValidationError("a radar chart needs at least one model");
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"13\">\n",
      num(kWidth), num(kSize + 20 * s.models.size()));
  out += fmt::format("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
  out += "<g fill=\"none\" stroke=\"#c8c8c8\" stroke-width=\"1\">\n";
  for (int ring = 1; ring <= 5; ++ring) {
    out += fmt::format("<polygon points=\"{}\"/>\n",
                       polygon_points(axes, [&](std::size_t) { return ring; }));
  }
  for (std::size_t a = 0; a < axes; ++a) {
    const auto [x, y] = point(a, axes, 5.0);
    out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n", num(kCx), num(kCy),
                       num(x), num(y));
  }
  out += "</g>\n";
  for (std::size_t a = 0; a < axes; ++a) {
    const auto [x, y] = point(a, axes, 5.75);
    const char* anchor = std::abs(x - kCx) < 1.0 ? "middle" : x > kCx ? "start" : "end";
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"{}\">{}</text>\n", num(x),
                       num(y + 4), anchor, escape(s.axes[a]));
  }
  for (std::size_t m = 0; m < s.models.size(); ++m) {
    const char* color = kPalette[m % std::size(kPalette)];
    out += fmt::format(
        "<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.15\" stroke=\"{}\" "
        "stroke-width=\"2\"/>\n",
        polygon_points(axes, [&](std::size_t a) { return s.scores[m][a]; }), color, color);
  }
  for (std::size_t m = 0; m < s.models.size(); ++m) {
    const char* color = kPalette[m % std::size(kPalette)];
    const double y = kSize - 20 + 20.0 * m;
    out += fmt::format("<rect x=\"20\" y=\"{}\" width=\"14\" height=\"14\" fill=\"{}\"/>\n",
                       num(y - 11), color);
    out += fmt::format("<text x=\"42\" y=\"{}\">{}</text>\n", num(y), escape(s.models[m]));
  }
  out += "</svg>\n";
  return out;
}

void emit_radar_svg(const ModuleScores& scores, const std::filesystem::path& path) {
  write_text(path, radar_svg(scores));
}

}  // namespace compass
