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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compass/attacks.h"
#include "compass/attribution.h"
#include "compass/dataset.h"
#include "compass/metrics.h"
#include "compass/model.h"

namespace compass {

// Structured pruning by zero-masking whole units. A unit is one output
// neuron of a dense layer or one filter of a conv layer; the last
// parametric layer (the logits) is never pruned.

enum class ImportanceMethod { kTaylor, kObdExact, kObdFisher, kMagnitude };

const char* importance_name(ImportanceMethod method);
// Throws ValidationError for unknown names.
ImportanceMethod parse_importance_method(const std::string& name);

// obd-exact needs one Jacobian per class and sample; larger models are refused.
inline constexpr std::size_t kObdExactParamLimit = 5000;

std::vector<std::size_t> prunable_layers(const Model& model);
std::size_t unit_count(const Model& model, std::size_t layer);
// Indices into the flattened parameter vector (Model::params concatenated)
// that belong to `unit`: its incoming weights and its bias.
std::vector<std::size_t> unit_parameters(const Model& model, std::size_t layer, std::size_t unit);

std::vector<double> flatten_params(const Model& model);

// Per-parameter statistics of the mean cross-entropy over `dataset`, in
// flattened parameter order. Samples are reduced in dataset order.
std::vector<double> mean_loss_gradient(const Model& model, const LabeledDataset& dataset);
// Mean over samples of the squared per-sample loss gradient.
std::vector<double> fisher_diagonal(const Model& model, const LabeledDataset& dataset);
// Diagonal of the loss Hessian. The logits are piecewise linear in each
// single parameter, so d2L/dw2 = J^T (diag(p) - p p^T) J with J = dz/dw.
std::vector<double> hessian_diagonal(const Model& model, const LabeledDataset& dataset);

// (g_i w_i)^2
std::vector<double> taylor_saliency(std::span<const double> weights,
                                    std::span<const double> mean_gradient);
// h_i w_i^2 / 2
std::vector<double> obd_saliency(std::span<const double> weights,
                                 std::span<const double> hessian_diagonal);

struct UnitScore {
  std::size_t layer = 0;
  std::size_t unit = 0;
  double score = 0;
  std::size_t param_count = 0;
};

struct ImportanceScores {
  std::string method;
  std::uint64_t dataset_fingerprint = 0;
  std::size_t total_params = 0;
  std::vector<UnitScore> units;  // layer-major, units ascending
};

std::uint64_t dataset_fingerprint(const LabeledDataset& dataset);

// Sums per-parameter scores within each prunable unit.
ImportanceScores unit_scores(const Model& model, std::span<const double> param_scores,
                             std::string method);
ImportanceScores importance(const Model& model, const LabeledDataset& dataset,
                            ImportanceMethod method);

struct LayerMask {
  std::size_t layer = 0;
  std::vector<bool> keep;
};

struct PruningMask {
  std::vector<LayerMask> layers;
  double requested_rate = 0;
  // Parameters of masked units over all model parameters.
  double achieved_rate = 0;

  std::size_t masked_units() const;
};

// Masks the floor(rate * n) lowest-scoring units of every prunable layer
// (ties to the lower index), always keeping at least one unit.
PruningMask build_mask(const ImportanceScores& scores, double rate);

struct PrunedModel {
  Model model;
  PruningMask mask;
  std::string base_name;
};

// Zeroes the weights and bias of every masked unit. Throws ValidationError
// when the mask does not fit the model.
PrunedModel apply_mask(const Model& model, const PruningMask& mask);

struct SweepOptions {
  // Samples the importance scores are computed on; the evaluation set when null.
  const LabeledDataset* scoring = nullptr;
  // White-box ASR on each pruned model, averaged over these attacks.
  std::vector<AttackConfig> attacks;
  // Insertion and deletion AUCs averaged over these methods and the first
  // `attribution_samples` samples, explaining the true label.
  std::vector<AttributionMethod> attributions;
  AttributionOptions attribution_options;
  std::size_t attribution_samples = 10;
  std::size_t curve_steps = 16;
};

struct SweepRow {
  std::string model;
  std::string method;
  double requested_rate = 0;
  double achieved_rate = 0;
  ClassificationReport report;
  std::optional<double> average_asr{};
  std::optional<double> insertion{};
  std::optional<double> deletion{};
};

struct PruningSweep {
  std::vector<SweepRow> rows;

  // Model, Method, Pruning Rate, Achieved Rate, the report metrics, then
  // Average ASR and Insertion/Deletion when they were computed.
  std::string to_csv() const;
};

// Label used in tables; marks the magnitude control as such.
std::string importance_label(ImportanceMethod method);

PruningSweep prune_and_evaluate(const Model& model, const LabeledDataset& dataset,
                                std::span<const ImportanceMethod> methods,
                                std::span<const double> rates, const SweepOptions& options = {});

}  // namespace compass
