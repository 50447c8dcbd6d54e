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

#include "compass/pruning.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "compass/errors.h"

namespace compass {
namespace {

constexpr ImportanceMethod kAllMethods[] = {
    ImportanceMethod::kTaylor,
    ImportanceMethod::kObdExact,
    ImportanceMethod::kObdFisher,
    ImportanceMethod::kMagnitude,
};

void require_samples(const LabeledDataset& dataset, const char* what) {
  if (dataset.empty()) throw ValidationError(fmt::format("{} needs a non-empty dataset", what));
}

void require_classes(const Model& model, const LabeledDataset& dataset) {
  if (dataset.num_classes() != model.num_classes()) {
    throw ValidationError(fmt::format("dataset has {} classes, model '{}' has {}",
                                      dataset.num_classes(), model.name(), model.num_classes()));
  }
}

// Offsets of every parameter tensor in the flattened vector.
std::vector<std::size_t> param_offsets(const Model& model) {
  std::vector<std::size_t> offsets;
  std::size_t at = 0;
  for (const Tensor& p : model.params()) {
    offsets.push_back(at);
    at += p.size();
  }
  return offsets;
}

void append(std::vector<double>& flat, const std::vector<Tensor>& tensors) {
  for (const Tensor& t : tensors) flat.insert(flat.end(), t.data().begin(), t.data().end());
}

void add_into(std::vector<double>& acc, const std::vector<Tensor>& grads, double scale,
              bool square) {
  std::size_t at = 0;
  for (const Tensor& t : grads) {
    for (double g : t.data()) acc[at++] += scale * (square ? g * g : g);
  }
}

void fnv(std::uint64_t& h, std::uint64_t word) {
  for (int b = 0; b < 8; ++b) {
    h ^= (word >> (8 * b)) & 0xffu;
    h *= 0x100000001b3ull;
  }
}

}  // namespace

const char* importance_name(ImportanceMethod method) {
  switch (method) {
    case ImportanceMethod::kTaylor: return "taylor";
    case ImportanceMethod::kObdExact: return "obd-exact";
    case ImportanceMethod::kObdFisher: return "obd-fisher";
    case ImportanceMethod::kMagnitude: return "magnitude";
  }
  return "?";
}

ImportanceMethod parse_importance_method(const std::string& name) {
  for (ImportanceMethod m : kAllMethods) {
    if (name == importance_name(m)) return m;
  }
  throw ValidationError("unknown pruning method '" + name + "'");
}

std::string importance_label(ImportanceMethod method) {
  if (method == ImportanceMethod::kMagnitude) return "magnitude (baseline)";
  return importance_name(method);
}

std::vector<std::size_t> prunable_layers(const Model& model) {
  std::vector<std::size_t> layers;
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    if (model.layers()[i].has_params()) layers.push_back(i);
  }
  if (!layers.empty()) layers.pop_back();  // logits
  return layers;
}

std::size_t unit_count(const Model& model, std::size_t layer) {
  if (layer >= model.layers().size() || !model.layers()[layer].has_params()) {
    throw ValidationError(fmt::format("layer {} of '{}' has no units", layer, model.name()));
  }
  return model.layers()[layer].out;
}

std::vector<std::size_t> unit_parameters(const Model& model, std::size_t layer, std::size_t unit) {
  const std::size_t n = unit_count(model, layer);
  if (unit >= n) throw ValidationError(fmt::format("unit {} out of range for layer {}", unit, layer));
  const std::size_t wi = *model.weight_index(layer);
  const std::vector<std::size_t> offsets = param_offsets(model);
  const Tensor& w = model.params()[wi];
  std::vector<std::size_t> idx;
  if (model.layers()[layer].kind == LayerKind::kDense) {
    const std::size_t in = w.dim(0);
    for (std::size_t i = 0; i < in; ++i) idx.push_back(offsets[wi] + i * n + unit);
  } else {
    const std::size_t per = w.size() / n;
    for (std::size_t i = 0; i < per; ++i) idx.push_back(offsets[wi] + unit * per + i);
  }
  idx.push_back(offsets[wi + 1] + unit);
  return idx;
}

std::vector<double> flatten_params(const Model& model) {
  std::vector<double> flat;
  flat.reserve(model.param_count());
  append(flat, model.params());
  return flat;
}

std::vector<double> mean_loss_gradient(const Model& model, const LabeledDataset& dataset) {
  require_samples(dataset, "the loss gradient");
  require_classes(model, dataset);
  Network net(model, 1);
  std::vector<double> acc(model.param_count(), 0.0);
  std::vector<Tensor> grads;
  const double scale = 1.0 / static_cast<double>(dataset.size());
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    net.loss_gradient(dataset.input(s), std::span(&dataset.labels()[s], 1), nullptr, &grads);
    add_into(acc, grads, scale, false);
  }
  return acc;
}

std::vector<double> fisher_diagonal(const Model& model, const LabeledDataset& dataset) {
  require_samples(dataset, "the Fisher diagonal");
  require_classes(model, dataset);
  Network net(model, 1);
  std::vector<double> acc(model.param_count(), 0.0);
  std::vector<Tensor> grads;
  const double scale = 1.0 / static_cast<double>(dataset.size());
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    net.loss_gradient(dataset.input(s), std::span(&dataset.labels()[s], 1), nullptr, &grads);
    add_into(acc, grads, scale, true);
  }
  return acc;
}

std::vector<double> hessian_diagonal(const Model& model, const LabeledDataset& dataset) {
  require_samples(dataset, "the Hessian diagonal");
  require_classes(model, dataset);
  const std::size_t c = model.num_classes();
  const std::size_t n = model.param_count();
  Network net(model, 1);
  std::vector<double> acc(n, 0.0);
  std::vector<double> first(n), second(n);
  std::vector<Tensor> grads;
  const double scale = 1.0 / static_cast<double>(dataset.size());
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    const Tensor x = dataset.input(s);
    const Tensor p = softmax_rows(net.logits(x));
    std::fill(first.begin(), first.end(), 0.0);
    std::fill(second.begin(), second.end(), 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      net.logit_gradient(x, k, &grads);
      std::size_t at = 0;
      for (const Tensor& t : grads) {
        for (double j : t.data()) {
          first[at] += p[k] * j;
          second[at] += p[k] * j * j;
          ++at;
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) acc[i] += scale * (second[i] - first[i] * first[i]);
  }
  return acc;
}

std::vector<double> taylor_saliency(std::span<const double> weights,
                                    std::span<const double> mean_gradient) {
  if (weights.size() != mean_gradient.size()) throw ShapeError("taylor: size mismatch");
  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = mean_gradient[i] * weights[i];
    out[i] = d * d;
  }
  return out;
}

std::vector<double> obd_saliency(std::span<const double> weights,
                                 std::span<const double> hessian_diagonal) {
  if (weights.size() != hessian_diagonal.size()) throw ShapeError("obd: size mismatch");
  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * hessian_diagonal[i] * weights[i] * weights[i];
  }
  return out;
}

std::uint64_t dataset_fingerprint(const LabeledDataset& dataset) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  fnv(h, dataset.size());
  fnv(h, dataset.num_classes());
  for (std::size_t d : dataset.sample_shape()) fnv(h, d);
  for (std::uint32_t l : dataset.labels()) fnv(h, l);
  for (std::uint64_t id : dataset.ids()) fnv(h, id);
  for (double v : dataset.inputs().data()) fnv(h, std::bit_cast<std::uint64_t>(v));
  return h;
}

ImportanceScores unit_scores(const Model& model, std::span<const double> param_scores,
                             std::string method) {
  if (param_scores.size() != model.param_count()) {
    throw ShapeError(fmt::format("expected {} parameter scores, got {}", model.param_count(),
                                 param_scores.size()));
  }
  ImportanceScores out;
  out.method = std::move(method);
  out.total_params = model.param_count();
  for (std::size_t layer : prunable_layers(model)) {
    for (std::size_t u = 0; u < unit_count(model, layer); ++u) {
      const std::vector<std::size_t> idx = unit_parameters(model, layer, u);
      double sum = 0.0;
      for (std::size_t i : idx) sum += param_scores[i];
      if (!std::isfinite(sum) || sum < 0.0) {
        // Rounding can leave a Hessian-based score a hair below zero.
        if (std::isfinite(sum) && sum > -1e-12) {
          sum = 0.0;
        } else {
          throw NonFiniteError(fmt::format("invalid importance {} for layer {} unit {}", sum,
                                           layer, u));
        }
      }
      out.units.push_back({.layer = layer, .unit = u, .score = sum, .param_count = idx.size()});
    }
  }
  return out;
}

ImportanceScores importance(const Model& model, const LabeledDataset& dataset,
                            ImportanceMethod method) {
  const std::vector<double> w = flatten_params(model);
  std::vector<double> scores;
  switch (method) {
    case ImportanceMethod::kTaylor:
      scores = taylor_saliency(w, mean_loss_gradient(model, dataset));
      break;
    case ImportanceMethod::kObdExact:
      if (model.param_count() > kObdExactParamLimit) {
        throw ValidationError(fmt::format("obd-exact supports at most {} parameters; '{}' has {}",
                                          kObdExactParamLimit, model.name(),
                                          model.param_count()));
      }
      scores = obd_saliency(w, hessian_diagonal(model, dataset));
      break;
    case ImportanceMethod::kObdFisher:
      scores = obd_saliency(w, fisher_diagonal(model, dataset));
      break;
    case ImportanceMethod::kMagnitude:
      scores.resize(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) scores[i] = w[i] * w[i];
      break;
  }
  ImportanceScores out = unit_scores(model, scores, importance_name(method));
  out.dataset_fingerprint = dataset_fingerprint(dataset);
  return out;
}

std::size_t PruningMask::masked_units() const {
  std::size_t n = 0;
  for (const LayerMask& l : layers) n += std::count(l.keep.begin(), l.keep.end(), false);
  return n;
}

PruningMask build_mask(const ImportanceScores& scores, double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ValidationError(fmt::format("pruning rate must lie in [0, 1), got {}", rate));
  }
  PruningMask mask;
  mask.requested_rate = rate;
  std::size_t pruned_params = 0;
  std::size_t begin = 0;
  while (begin < scores.units.size()) {
    const std::size_t layer = scores.units[begin].layer;
    std::size_t end = begin;
    while (end < scores.units.size() && scores.units[end].layer == layer) {
      const UnitScore& u = scores.units[end];
      if (u.unit != end - begin) {
        throw ValidationError(fmt::format("scores for layer {} are not in unit order", layer));
      }
      if (!std::isfinite(u.score) || u.score < 0.0) {
        throw ValidationError(fmt::format("invalid score for layer {} unit {}", layer, u.unit));
      }
      ++end;
    }
    const std::size_t n = end - begin;
    // The epsilon keeps products such as 0.45 * 20 from rounding down.
    std::size_t count = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
    count = std::min(count, n - 1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores.units[begin + a].score < scores.units[begin + b].score;
    });
    LayerMask lm{.layer = layer, .keep = std::vector<bool>(n, true)};
    for (std::size_t i = 0; i < count; ++i) {
      lm.keep[order[i]] = false;
      pruned_params += scores.units[begin + order[i]].param_count;
    }
    mask.layers.push_back(std::move(lm));
    begin = end;
  }
  mask.achieved_rate = scores.total_params == 0
                           ? 0.0
                           : static_cast<double>(pruned_params) /
                                 static_cast<double>(scores.total_params);
  return mask;
}

PrunedModel apply_mask(const Model& model, const PruningMask& mask) {
  const std::vector<std::size_t> prunable = prunable_layers(model);
  std::vector<bool> seen(model.layers().size(), false);
  std::vector<Tensor> params = model.params();
  const std::vector<std::size_t> offsets = param_offsets(model);
  for (const LayerMask& lm : mask.layers) {
    if (std::find(prunable.begin(), prunable.end(), lm.layer) == prunable.end()) {
      throw ValidationError(fmt::format("mask names layer {}, which '{}' cannot prune", lm.layer,
                                        model.name()));
    }
    if (seen[lm.layer]) throw ValidationError(fmt::format("mask repeats layer {}", lm.layer));
    seen[lm.layer] = true;
    const std::size_t n = unit_count(model, lm.layer);
    if (lm.keep.size() != n) {
      throw ValidationError(fmt::format("mask for layer {} has {} entries, layer has {} units",
                                        lm.layer, lm.keep.size(), n));
    }
    if (std::find(lm.keep.begin(), lm.keep.end(), true) == lm.keep.end()) {
      throw ValidationError(fmt::format("mask removes every unit of layer {}", lm.layer));
    }
    for (std::size_t u = 0; u < n; ++u) {
      if (lm.keep[u]) continue;
      for (std::size_t flat : unit_parameters(model, lm.layer, u)) {
        const std::size_t t =
            std::upper_bound(offsets.begin(), offsets.end(), flat) - offsets.begin() - 1;
        params[t][flat - offsets[t]] = 0.0;
      }
    }
  }
  return {model.with_params(std::move(params)), mask, model.name()};
}

std::string PruningSweep::to_csv() const {
  const bool asr = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) {
    return r.average_asr.has_value();
  });
  const bool curves = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) {
    return r.insertion.has_value();
  });
  std::string out = "Model,Method,Pruning Rate,Achieved Rate," + report_metric_header();
  if (asr) out += ",Average ASR";
  if (curves) out += ",Insertion,Deletion";
  out += "\n";
  for (const SweepRow& r : rows) {
    out += fmt::format("{},{},{},{},{}", r.model, r.method, format_number(r.requested_rate),
                       format_number(r.achieved_rate), report_metric_cells(r.report));
    if (asr) out += "," + format_optional(r.average_asr);
    if (curves) out += "," + format_optional(r.insertion) + "," + format_optional(r.deletion);
    out += "\n";
  }
  return out;
}

PruningSweep prune_and_evaluate(const Model& model, const LabeledDataset& dataset,
                                std::span<const ImportanceMethod> methods,
                                std::span<const double> rates, const SweepOptions& options) {
  for (double r : rates) {
    if (!(r >= 0.0 && r < 1.0)) {
      throw ValidationError(fmt::format("pruning rate must lie in [0, 1), got {}", r));
    }
  }
  for (const AttackConfig& a : options.attacks) validate_attack(a);
  if (!options.attributions.empty() && options.attribution_samples == 0) {
    throw ValidationError("attribution_samples must be positive");
  }
  PruningSweep sweep;
  const LabeledDataset explained = dataset.head(options.attribution_samples);
  for (ImportanceMethod method : methods) {
    const ImportanceScores scores =
        importance(model, options.scoring ? *options.scoring : dataset, method);
    for (double rate : rates) {
      const PrunedModel pruned = apply_mask(model, build_mask(scores, rate));
      SweepRow row{.model = model.name(),
                   .method = importance_label(method),
                   .requested_rate = rate,
                   .achieved_rate = pruned.mask.achieved_rate,
                   .report = classification_report(pruned.model, dataset)};
      if (!options.attacks.empty()) {
        double sum = 0.0;
        for (const AttackConfig& a : options.attacks) {
          sum += attack_success_rate(run_attack(pruned.model, dataset, a), pruned.model);
        }
        row.average_asr = sum / static_cast<double>(options.attacks.size());
      }
      if (!options.attributions.empty()) {
        double ins = 0.0, del = 0.0;
        std::size_t count = 0;
        for (AttributionMethod am : options.attributions) {
          for (std::size_t s = 0; s < explained.size(); ++s) {
            const Tensor x = explained.input(s).reshaped(explained.sample_shape());
            const std::size_t target = explained.labels()[s];
            const AttributionMap map = attribute(pruned.model, x, target, am,
                                                 options.attribution_options);
            const auto [insertion, deletion] =
                insertion_deletion(pruned.model, x, target, map, options.curve_steps);
            ins += insertion.auc;
            del += deletion.auc;
            ++count;
          }
        }
        row.insertion = ins / static_cast<double>(count);
        row.deletion = del / static_cast<double>(count);
      }
      sweep.rows.push_back(std::move(row));
    }
  }
  return sweep;
}

}  // namespace compass
