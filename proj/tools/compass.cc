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

// compass: command-line front end of the toolkit.
//
// Exit status: 0 success, 1 invalid input or arguments, 2 runtime failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "compass/attacks.h"
#include "compass/attribution.h"
#include "compass/binary_io.h"
#include "compass/config.h"
#include "compass/dataset.h"
#include "compass/errors.h"
#include "compass/metrics.h"
#include "compass/model.h"
#include "compass/pipeline.h"
#include "compass/pruning.h"

namespace {

using namespace compass;

void run_config(const std::filesystem::path& config_path, const std::string& out) {
  RunConfig config = load_run_config(config_path);
  if (!out.empty()) config.output = out;
  const RunResult result = run_pipeline(config);
  for (const std::string& f : result.files) {
    std::cout << (result.output / f).string() << "\n";
  }
}

void check_fits(const Model& model, const LabeledDataset& data) {
  if (model.input_shape() != data.sample_shape() || model.num_classes() != data.num_classes()) {
    throw ValidationError(fmt::format("model '{}' does not fit the dataset", model.name()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate image classifiers: metrics, mutants, attacks, attribution, pruning."};
  app.require_subcommand(1);

  std::string config_path, out;
  auto* run = app.add_subcommand("run", "Run every module enabled in a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--out", out, "Output directory (overrides the config)");

  auto* report = app.add_subcommand("report", "Run a config and write its report to a directory");
  report->add_option("--config", config_path, "Config file")->required();
  report->add_option("--out", out, "Output directory")->required();

  std::string model_path, data_path;
  auto* metrics = app.add_subcommand("metrics", "Classification report of a model");
  metrics->add_option("--model", model_path)->required();
  metrics->add_option("--data", data_path)->required();
  metrics->add_option("--out", out, "CSV file")->required();

  std::string kind;
  double intensity = -1;
  std::uint64_t seed = 0;
  auto* mutate_cmd = app.add_subcommand("mutate", "Write a corrupted copy of a dataset");
  mutate_cmd->add_option("--kind", kind)->required();
  mutate_cmd->add_option("--p", intensity, "Intensity (kind default when omitted)");
  mutate_cmd->add_option("--seed", seed);
  mutate_cmd->add_option("--data", data_path)->required();
  mutate_cmd->add_option("--out", out, "Dataset directory")->required();

  std::string method;
  std::vector<std::string> target_paths;
  std::optional<double> eps, alpha;
  std::optional<std::size_t> steps;
  std::size_t samples = 0;
  auto* attack = app.add_subcommand("attack", "Attack success rates, white-box and transferred");
  attack->add_option("--method", method)->required();
  attack->add_option("--eps", eps);
  attack->add_option("--alpha", alpha);
  attack->add_option("--steps", steps);
  attack->add_option("--seed", seed);
  attack->add_option("--model", model_path)->required();
  attack->add_option("--targets", target_paths)->delimiter(',');
  attack->add_option("--data", data_path)->required();
  attack->add_option("--samples", samples, "Use the first N samples (0: all)");
  attack->add_option("--out", out, "CSV file")->required();

  bool heatmaps = false;
  std::size_t curve_steps = 16;
  auto* attribute_cmd = app.add_subcommand("attribute", "Attribution maps and their insertion/deletion AUCs");
  attribute_cmd->add_option("--method", method)->required();
  attribute_cmd->add_option("--model", model_path)->required();
  attribute_cmd->add_option("--data", data_path)->required();
  attribute_cmd->add_option("--out", out, "Output directory")->required();
  attribute_cmd->add_option("--samples", samples, "Use the first N samples (0: all)");
  attribute_cmd->add_option("--curve-steps", curve_steps);
  attribute_cmd->add_option("--seed", seed);
  attribute_cmd->add_flag("--heatmaps", heatmaps, "Also write PGM heatmaps");

  std::vector<std::string> methods;
  std::vector<double> rates{0.35, 0.4, 0.45, 0.5};
  std::string scoring_path;
  auto* prune = app.add_subcommand("prune", "Accuracy of structurally pruned models");
  prune->add_option("--method", methods)->required()->delimiter(',');
  prune->add_option("--rates", rates)->delimiter(',');
  prune->add_option("--model", model_path)->required();
  prune->add_option("--data", data_path)->required();
  prune->add_option("--scoring-data", scoring_path, "Dataset for importance scores");
  prune->add_option("--out", out, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run || *report) {
      run_config(config_path, out);
    } else if (*metrics) {
      const Model model = load_model(model_path);
      const LabeledDataset data = load_dataset(data_path);
      check_fits(model, data);
      std::string csv = report_csv_header() + "\n";
      for (const std::string& row : report_csv_rows(model.name(), classification_report(model, data))) {
        csv += row + "\n";
      }
      write_text(out, csv);
    } else if (*mutate_cmd) {
      MutationSpec spec;
      spec.kind = parse_mutation_kind(kind);
      spec.intensity = *mutate_cmd->get_option("--p") ? intensity : default_intensity(spec.kind);
      spec.seed = seed;
      validate_mutation(spec);
      save_dataset(mutate(load_dataset(data_path), spec), out);
    } else if (*attack) {
      AttackConfig config = default_attack_config(parse_attack_method(method));
      if (eps) config.epsilon = *eps;
      if (alpha) config.alpha = *alpha;
      if (steps) config.steps = *steps;
      config.seed = seed;
      validate_attack(config);
      const Model source = load_model(model_path);
      std::vector<Model> others;
      for (const std::string& p : target_paths) others.push_back(load_model(p));
      std::vector<const Model*> targets{&source};
      for (const Model& m : others) targets.push_back(&m);
      const LabeledDataset full = load_dataset(data_path);
      check_fits(source, full);
      const LabeledDataset data = samples ? full.head(samples) : full;
      const std::vector<AttackConfig> configs{config};
      write_text(out, evaluate_transfer(source, targets, data, configs).to_csv());
    } else if (*attribute_cmd) {
      const AttributionMethod am = parse_attribution_method(method);
      if (curve_steps == 0) throw ValidationError("--curve-steps must be positive");
      const Model model = load_model(model_path);
      const LabeledDataset full = load_dataset(data_path);
      check_fits(model, full);
      const LabeledDataset data = samples ? full.head(samples) : full;
      AttributionOptions options;
      options.seed = seed;
      const std::filesystem::path dir(out);
      std::filesystem::create_directories(dir);
      std::string csv = "Sample,Target,Insertion,Deletion\n";
      for (std::size_t s = 0; s < data.size(); ++s) {
        const Tensor x = data.input(s).reshaped(data.sample_shape());
        const std::size_t target = data.labels()[s];
        AttributionMap map;
        try {
          map = attribute(model, x, target, am, options);
        } catch (const NotFoundError& e) {
          csv += fmt::format("{},{},N/A,N/A\n", data.ids()[s], target);
          continue;
        }
        map.sample_id = data.ids()[s];
        const auto [ins, del] = insertion_deletion(model, x, target, map, curve_steps);
        csv += fmt::format("{},{},{},{}\n", map.sample_id, target, format_number(ins.auc),
                           format_number(del.auc));
        if (heatmaps) render_heatmap(map, dir / fmt::format("{}.pgm", map.sample_id));
      }
      write_text(dir / "attribution.csv", csv);
    } else if (*prune) {
      std::vector<ImportanceMethod> parsed;
      for (const std::string& m : methods) parsed.push_back(parse_importance_method(m));
      const Model model = load_model(model_path);
      const LabeledDataset data = load_dataset(data_path);
      check_fits(model, data);
      SweepOptions options;
      std::optional<LabeledDataset> scoring;
      if (!scoring_path.empty()) {
        scoring.emplace(load_dataset(scoring_path));
        check_fits(model, *scoring);
        options.scoring = &*scoring;
      }
      write_text(out, prune_and_evaluate(model, data, parsed, rates, options).to_csv());
    }
  } catch (const ValidationError& e) {
    std::cerr << "compass: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "compass: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
