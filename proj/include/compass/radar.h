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

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace compass {

enum class Direction { kHigherBetter, kLowerBetter };

const char* direction_name(Direction d);

// Per-model module values and their 0..5 scores. values[m][a] is model m on
// axis a.
struct ModuleScores {
  std::vector<std::string> models;
  std::vector<std::string> axes;
  std::vector<Direction> directions;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> scores;
};

// Higher-better: 5 v / max. Lower-better: 5 min / v, which needs v > 0.
// A higher-better axis whose values are all 0 scores 5 for everyone.
// Throws ValidationError on negative values, non-finite values or a
// non-positive value on a lower-better axis.
std::vector<std::vector<double>> radar_scores(const std::vector<std::vector<double>>& values,
                                              std::span<const Direction> directions);

ModuleScores score_modules(std::vector<std::string> models, std::vector<std::string> axes,
                           std::vector<Direction> directions,
                           std::vector<std::vector<double>> values);

// Standalone SVG: rings at 1..5, one closed polygon per model, legend.
std::string radar_svg(const ModuleScores& scores);
void emit_radar_svg(const ModuleScores& scores, const std::filesystem::path& path);

}  // namespace compass
