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

#include "compass/pipeline.h"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "compass/attacks.h"
#include "compass/attribution.h"
#include "compass/binary_io.h"
#include "compass/errors.h"
#include "compass/pruning.h"

namespace compass {
namespace {

using Json = nlohmann::ordered_json;

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json report_json(const ClassificationReport& r) {
  return {{"accuracy", r.accuracy}, {"loss", r.loss},     {"precision", r.precision},
          {"recall", r.recall},     {"f1", r.f1},         {"roc_auc", optional_json(r.roc_auc)},
          {"na_count", r.na_count}};
}

// Per-model values of the five radar axes, filled as modules complete.
struct AxisValues {
  double basic = 0, mutant = 0, robustness = 0, interpretability = 0, neuron = 0;
};

class Run {
 public:
  explicit Run(const RunConfig& cfg) : cfg_(cfg) {}

  RunResult execute() {
    prepare_output();
    load_inputs();
    const std::vector<std::string> modules = cfg_.enabled_modules();
    for (const std::string& module : modules) {
      try {
        if (module == "metrics") metrics();
        if (module == "mutants") mutants();
        if (module == "attacks") attacks();
        if (module == "attribution") attribution();
        if (module == "pruning") pruning();
        if (module == "radar") radar();
      } catch (const std::exception& e) {
        write_text(cfg_.output / kIncompleteMarker,
                   fmt::format("module {} failed: {}\n", module, e.what()));
        throw;
      }
    }
    summary_["files"] = result_.files;
    write_json(cfg_.output / kSummaryJson, summary_);
    result_.files.push_back(kSummaryJson);
    if (result_.radar) {
      emit_radar_svg(*result_.radar, cfg_.output / kRadarSvg);
      result_.files.push_back(kRadarSvg);
    }
    result_.output = cfg_.output;
    return result_;
  }

 private:
  void prepare_output() {
    std::filesystem::create_directories(cfg_.output);
    for (const char* f : {kMetricsCsv, kMutantsCsv, kAttacksCsv, kAttributionCsv, kPruningCsv,
                          kSummaryJson, kRadarSvg, kIncompleteMarker}) {
      std::filesystem::remove(cfg_.output / f);
    }
    std::filesystem::remove_all(cfg_.output / "heatmaps");
  }

  void load_inputs() {
    dataset_.emplace(load_dataset(cfg_.dataset));
    for (const auto& path : cfg_.models) {
      Model m = load_model(path);
      if (m.input_shape() != dataset_->sample_shape() ||
          m.num_classes() != dataset_->num_classes()) {
        throw ValidationError(fmt::format(
            "model '{}' takes {} with {} classes; the dataset holds {} with {} classes", m.name(),
            shape_string(m.input_shape()), m.num_classes(), shape_string(dataset_->sample_shape()),
            dataset_->num_classes()));
      }
      if (std::any_of(models_.begin(), models_.end(),
                      [&](const Model& o) { return o.name() == m.name(); })) {
        throw ValidationError("two models are named '" + m.name() + "'");
      }
      models_.push_back(std::move(m));
    }
    axes_.resize(models_.size());
    summary_["version"] = kConfigVersion;
    summary_["seed"] = cfg_.seed;
    summary_["dataset"] = {{"name", cfg_.dataset.filename().string()},
                           {"samples", dataset_->size()},
                           {"fingerprint", fmt::format("{:016x}", dataset_fingerprint(*dataset_))}};
    Json models = Json::array();
    for (const Model& m : models_) models.push_back({{"name", m.name()}, {"params", m.param_count()}});
    summary_["models"] = models;
    summary_["modules"] = cfg_.enabled_modules();
  }

  void write_module(const char* file, const std::string& text) {
    write_text(cfg_.output / file, text);
    result_.files.push_back(file);
  }

  const ClassificationReport& base_report(std::size_t m) {
    if (base_reports_.size() != models_.size()) {
      for (const Model& model : models_) base_reports_.push_back(classification_report(model, *dataset_));
    }
    return base_reports_[m];
  }

  void metrics() {
    std::string csv = report_csv_header() + "\n";
    Json out = Json::object();
    for (std::size_t m = 0; m < models_.size(); ++m) {
      const ClassificationReport& r = base_report(m);
      for (const std::string& row : report_csv_rows(models_[m].name(), r)) csv += row + "\n";
      out[models_[m].name()] = report_json(r);
      if (cfg_.radar) axes_[m].basic = report_metric(r, cfg_.radar->basic_metric);
    }
    write_module(kMetricsCsv, csv);
    summary_["metrics"] = out;
  }

  void mutants() {
    std::string csv = "Model,Mutation,Intensity,Samples," + report_metric_header() + "\n";
    std::vector<LabeledDataset> mutated;
    for (const MutationSpec& spec : cfg_.mutants->mutations) mutated.push_back(mutate(*dataset_, spec));
    Json out = Json::object();
    for (std::size_t m = 0; m < models_.size(); ++m) {
      const ClassificationReport& base = base_report(m);
      csv += fmt::format("{},origin,,{},{}\n", models_[m].name(), base.n, report_metric_cells(base));
      Json rows = Json::array();
      double sum = 0.0;
      std::optional<double> chosen;
      for (std::size_t i = 0; i < mutated.size(); ++i) {
        const MutationSpec& spec = cfg_.mutants->mutations[i];
        const ClassificationReport r = classification_report(models_[m], mutated[i]);
        csv += fmt::format("{},{},{},{},{}\n", models_[m].name(), mutation_name(spec.kind),
                           format_number(spec.intensity), r.n, report_metric_cells(r));
        Json row = report_json(r);
        row["mutation"] = mutation_name(spec.kind);
        row["intensity"] = spec.intensity;
        row["seed"] = spec.seed;
        rows.push_back(row);
        if (cfg_.radar) {
          const double v = report_metric(r, cfg_.radar->mutant_metric);
          sum += v;
          if (!chosen && cfg_.radar->mutant_kind == mutation_name(spec.kind)) chosen = v;
        }
      }
      out[models_[m].name()] = rows;
      if (cfg_.radar) {
        axes_[m].mutant = chosen ? *chosen : sum / static_cast<double>(mutated.size());
      }
    }
    write_module(kMutantsCsv, csv);
    summary_["mutants"] = out;
  }

  void attacks() {
    const AttacksModule& cfg = *cfg_.attacks;
    const LabeledDataset data = cfg.samples ? dataset_->head(cfg.samples) : *dataset_;
    std::vector<const Model*> targets;
    for (const Model& m : models_) targets.push_back(&m);
    std::string csv;
    Json out = Json::object();
    std::vector<TransferResult> results;
    for (const Model& source : models_) {
      results.push_back(evaluate_transfer(source, targets, data, cfg.attacks));
      const TransferResult& t = results.back();
      const std::string table = t.to_csv();
      csv += csv.empty() ? table : table.substr(table.find('\n') + 1);
      Json rows = Json::object();
      for (const TransferRow& row : t.rows) {
        Json cells = Json::object();
        for (std::size_t j = 0; j < t.targets.size(); ++j) cells[t.targets[j]] = row.asr[j];
        rows[row.method] = cells;
      }
      out[source.name()] = {{"samples", data.size()},
                            {"asr", rows},
                            {"average_white_box", t.average.white_box}};
    }
    for (std::size_t m = 0; m < models_.size() && cfg_.radar; ++m) {
      if (cfg_.radar->attack_metric == "white-box") {
        axes_[m].robustness = results[m].average.white_box;
      } else {
        double sum = 0.0;
        for (std::size_t s = 0; s < models_.size(); ++s) {
          if (s != m) sum += results[s].average.asr[m];
        }
        axes_[m].robustness = sum / static_cast<double>(models_.size() - 1);
      }
    }
    write_module(kAttacksCsv, csv);
    summary_["attacks"] = out;
  }

  void attribution() {
    const AttributionModule& cfg = *cfg_.attribution;
    const LabeledDataset data = dataset_->head(cfg.samples);
    std::string csv = "Model,Method,Samples,Skipped,Insertion,Deletion\n";
    Json out = Json::object();
    for (std::size_t m = 0; m < models_.size(); ++m) {
      const Model& model = models_[m];
      Json methods = Json::object();
      double ins_sum = 0.0, del_sum = 0.0;
      for (AttributionMethod method : cfg.methods) {
        double ins = 0.0, del = 0.0;
        std::size_t done = 0, skipped = 0;
        for (std::size_t s = 0; s < data.size(); ++s) {
          const Tensor x = data.input(s).reshaped(data.sample_shape());
          const std::size_t target = data.labels()[s];
          AttributionMap map;
          try {
            map = attribute(model, x, target, method, cfg.options);
          } catch (const NotFoundError&) {
            // No boundary point within the attack budget.
            ++skipped;
            continue;
          }
          map.sample_id = data.ids()[s];
          const auto [insertion, deletion] = insertion_deletion(model, x, target, map, cfg.curve_steps);
          ins += insertion.auc;
          del += deletion.auc;
          ++done;
          if (cfg.heatmaps) {
            const auto dir = cfg_.output / "heatmaps" / model.name() / attribution_name(method);
            std::filesystem::create_directories(dir);
            render_heatmap(map, dir / fmt::format("{}.pgm", map.sample_id));
          }
        }
        if (done == 0) {
          throw NotFoundError(fmt::format("{} produced no attribution for model '{}'",
                                          attribution_name(method), model.name()));
        }
        ins /= static_cast<double>(done);
        del /= static_cast<double>(done);
        ins_sum += ins;
        del_sum += del;
        csv += fmt::format("{},{},{},{},{},{}\n", model.name(), attribution_name(method), done,
                           skipped, format_number(ins), format_number(del));
        methods[attribution_name(method)] = {
            {"samples", done}, {"skipped", skipped}, {"insertion", ins}, {"deletion", del}};
      }
      const double n = static_cast<double>(cfg.methods.size());
      out[model.name()] = {{"methods", methods},
                           {"average_insertion", ins_sum / n},
                           {"average_deletion", del_sum / n}};
      if (cfg_.radar) {
        axes_[m].interpretability =
            cfg_.radar->attribution_metric == "insertion" ? ins_sum / n : del_sum / n;
      }
    }
    write_module(kAttributionCsv, csv);
    summary_["attribution"] = out;
  }

  void pruning() {
    const PruningModule& cfg = *cfg_.pruning;
    std::optional<LabeledDataset> scoring;
    if (cfg.scoring_dataset) scoring.emplace(load_dataset(*cfg.scoring_dataset));
    const LabeledDataset& base = scoring ? *scoring : *dataset_;
    const LabeledDataset scored = cfg.scoring_samples ? base.head(cfg.scoring_samples) : base;
    for (const Model& m : models_) {
      if (scored.sample_shape() != m.input_shape() || scored.num_classes() != m.num_classes()) {
        throw ValidationError("the pruning scoring dataset does not fit model '" + m.name() + "'");
      }
    }
    SweepOptions options;
    options.scoring = &scored;
    const double tolerance = cfg_.radar ? cfg_.radar->pruning_tolerance : 0.02;
    std::string csv;
    Json out = Json::object();
    for (std::size_t m = 0; m < models_.size(); ++m) {
      const PruningSweep sweep =
          prune_and_evaluate(models_[m], *dataset_, cfg.methods, cfg.rates, options);
      const std::string table = sweep.to_csv();
      csv += csv.empty() ? table : table.substr(table.find('\n') + 1);
      const double base_accuracy = base_report(m).accuracy;
      double max_rate = 0.0;
      Json rows = Json::array();
      for (const SweepRow& row : sweep.rows) {
        // Accuracies are multiples of 1/n; the slack absorbs rounding only.
        if (row.report.accuracy >= base_accuracy - tolerance - 1e-12) {
          max_rate = std::max(max_rate, row.requested_rate);
        }
        rows.push_back({{"method", row.method},
                        {"rate", row.requested_rate},
                        {"achieved_rate", row.achieved_rate},
                        {"accuracy", row.report.accuracy},
                        {"loss", row.report.loss}});
      }
      out[models_[m].name()] = {{"baseline_accuracy", base_accuracy},
                                {"tolerance", tolerance},
                                {"max_maintained_rate", max_rate},
                                {"rows", rows}};
      axes_[m].neuron = max_rate;
    }
    write_module(kPruningCsv, csv);
    summary_["pruning"] = out;
  }

  void radar() {
    const RadarModule& r = *cfg_.radar;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    for (std::size_t m = 0; m < models_.size(); ++m) {
      names.push_back(models_[m].name());
      const AxisValues& a = axes_[m];
      values.push_back({a.basic, a.mutant, a.robustness, a.interpretability, a.neuron});
    }
    const std::vector<std::string> metrics{
        r.basic_metric, fmt::format("{} under {}", r.mutant_metric, r.mutant_kind),
        fmt::format("{} ASR", r.attack_metric), fmt::format("average {}", r.attribution_metric),
        "max maintained pruning rate"};
    ModuleScores scores = score_modules(
        names, {"Basic Metrics", "Basic Mutants", "Robustness", "Interpretability", "Neuron Analysis"},
        {metric_direction(r.basic_metric), metric_direction(r.mutant_metric), Direction::kLowerBetter,
         r.attribution_metric == "insertion" ? Direction::kHigherBetter : Direction::kLowerBetter,
         Direction::kHigherBetter},
        values);
    Json axes = Json::array();
    for (std::size_t a = 0; a < scores.axes.size(); ++a) {
      axes.push_back({{"name", scores.axes[a]},
                      {"metric", metrics[a]},
                      {"direction", direction_name(scores.directions[a])}});
    }
    Json models = Json::object();
    for (std::size_t m = 0; m < scores.models.size(); ++m) {
      models[scores.models[m]] = {{"values", scores.values[m]}, {"scores", scores.scores[m]}};
    }
    summary_["radar"] = {{"axes", axes}, {"models", models}};
    result_.radar = std::move(scores);
  }

  const RunConfig& cfg_;
  std::optional<LabeledDataset> dataset_;
  std::vector<Model> models_;
  std::vector<ClassificationReport> base_reports_;
  std::vector<AxisValues> axes_;
  Json summary_ = Json::object();
  RunResult result_;
};

}  // namespace

double report_metric(const ClassificationReport& report, const std::string& name) {
  if (name == "accuracy") return report.accuracy;
  if (name == "precision") return report.precision;
  if (name == "recall") return report.recall;
  if (name == "f1") return report.f1;
  if (name == "loss") return report.loss;
  if (name == "roc_auc") {
    if (!report.roc_auc) throw ValidationError("ROC AUC is undefined on this dataset");
    return *report.roc_auc;
  }
  throw ValidationError("unknown report metric '" + name + "'");
}

Direction metric_direction(const std::string& name) {
  return name == "loss" ? Direction::kLowerBetter : Direction::kHigherBetter;
}

RunResult run_pipeline(const RunConfig& config) { return Run(config).execute(); }

}  // namespace compass
