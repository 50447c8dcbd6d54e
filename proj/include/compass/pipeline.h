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
#include <optional>
#include <string>
#include <vector>

#include "compass/config.h"
#include "compass/metrics.h"
#include "compass/radar.h"

namespace compass {

// Files a run may write into its output directory.
inline constexpr const char* kMetricsCsv = "metrics.csv";
inline constexpr const char* kMutantsCsv = "mutants.csv";
inline constexpr const char* kAttacksCsv = "attacks.csv";
inline constexpr const char* kAttributionCsv = "attribution.csv";
inline constexpr const char* kPruningCsv = "pruning.csv";
inline constexpr const char* kSummaryJson = "summary.json";
inline constexpr const char* kRadarSvg = "radar.svg";
// Written instead of a summary when a module fails; holds the error.
inline constexpr const char* kIncompleteMarker = "INCOMPLETE";

struct RunResult {
  std::filesystem::path output;
  std::vector<std::string> files;  // relative to `output`, in write order
  std::optional<ModuleScores> radar;
};

// Runs the enabled modules in the order metrics, mutants, attacks,
// attribution, pruning, radar. Output files from earlier runs are removed
// first. Every result depends only on the config, so repeated runs write
// identical bytes.
RunResult run_pipeline(const RunConfig& config);

// Named scalar of a report: accuracy, precision, recall, f1, roc_auc, loss.
double report_metric(const ClassificationReport& report, const std::string& name);
Direction metric_direction(const std::string& name);

}  // namespace compass
