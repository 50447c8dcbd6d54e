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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "compass/attacks.h"
#include "compass/attribution.h"
#include "compass/dataset.h"
#include "compass/pruning.h"

namespace compass {

// A full evaluation run, read from a JSON document:
//
//   {
//     "version": 1,
//     "seed": 7,
//     "models": ["models/a.model", "models/b.model"],
//     "dataset": "data/test",
//     "output": "out",
//     "modules": {
//       "metrics": {},
//       "mutants": {"mutations": [{"kind": "noise-perturb", "intensity": 0.1}]},
//       "attacks": {"methods": [{"method": "pgd", "epsilon": 0.03}], "samples": 100},
//       "attribution": {"methods": ["ig"], "samples": 10, "curve_steps": 16},
//       "pruning": {"methods": ["taylor"], "rates": [0.35, 0.4, 0.45, 0.5]},
//       "radar": {"basic_metric": "precision"}
//     }
//   }
//
// Relative paths resolve against the directory holding the config file.
// Unknown keys are errors. Seeds of mutations and attacks default to values
// derived from the run seed.
inline constexpr int kConfigVersion = 1;

inline constexpr const char* kModuleOrder[] = {"metrics", "mutants", "attacks",
                                               "attribution", "pruning", "radar"};

struct MutantsModule {
  std::vector<MutationSpec> mutations;
};

struct AttacksModule {
  std::vector<AttackConfig> attacks;
  std::size_t samples = 0;  // 0: the whole dataset
};

struct AttributionModule {
  std::vector<AttributionMethod> methods;
  AttributionOptions options;
  std::size_t samples = 10;
  std::size_t curve_steps = 16;
  bool heatmaps = false;
};

struct PruningModule {
  std::vector<ImportanceMethod> methods;
  std::vector<double> rates{0.35, 0.4, 0.45, 0.5};
  // Samples the importance scores are computed on; the run dataset if empty.
  std::optional<std::filesystem::path> scoring_dataset;
  std::size_t scoring_samples = 0;  // 0: all
};

// Which value of each module enters the radar chart.
struct RadarModule {
  std::string basic_metric = "precision";  // accuracy, precision, recall, f1, roc_auc, loss
  std::string mutant_metric = "precision";
  std::string mutant_kind = "label-error";  // a configured mutation, or "mean"
  std::string attack_metric = "white-box";  // or "transfer"
  std::string attribution_metric = "insertion";  // or "deletion"
  double pruning_tolerance = 0.02;  // accuracy drop still counted as maintained
};

struct RunConfig {
  std::filesystem::path base_dir;
  std::vector<std::filesystem::path> models;
  std::filesystem::path dataset;
  std::filesystem::path output;
  std::uint64_t seed = 0;
  bool metrics = false;
  std::optional<MutantsModule> mutants;
  std::optional<AttacksModule> attacks;
  std::optional<AttributionModule> attribution;
  std::optional<PruningModule> pruning;
  std::optional<RadarModule> radar;

  std::vector<std::string> enabled_modules() const;
};

// Throws ValidationError naming the offending field, e.g.
// "modules.attacks.methods[1].epsilon: expected a number".
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace compass
