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

#include "compass/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "compass/errors.h"

namespace compass {
namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// Mean of the defined entries; counts the undefined ones into `missing`.
double mean_defined(const std::vector<BinaryRates>& classes,
                    std::optional<double> BinaryRates::*field, std::size_t& missing) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const BinaryRates& r : classes) {
    if (const auto& v = r.*field) {
      sum += *v;
      ++count;
    } else {
      ++missing;
    }
  }
  if (count == 0) throw ValidationError("rate undefined for every class");
  return sum / static_cast<double>(count);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::span<const std::uint32_t> labels,
                                 std::span<const std::uint32_t> predictions,
                                 std::size_t num_classes)
    : c_(num_classes), counts_(num_classes * num_classes, 0) {
  if (labels.size() != predictions.size()) throw ShapeError("label and prediction counts differ");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= c_ || predictions[i] >= c_) throw ShapeError("class index out of range");
    ++counts_[labels[i] * c_ + predictions[i]];
  }
  total_ = labels.size();
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t s = 0;
  for (std::size_t k = 0; k < c_; ++k) s += at(k, k);
  return s;
}

std::size_t ConfusionMatrix::tp(std::size_t k) const { return at(k, k); }

std::size_t ConfusionMatrix::fp(std::size_t k) const {
  std::size_t s = 0;
  for (std::size_t t = 0; t < c_; ++t) if (t != k) s += at(t, k);
  return s;
}

std::size_t ConfusionMatrix::fn(std::size_t k) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < c_; ++p) if (p != k) s += at(k, p);
  return s;
}

std::size_t ConfusionMatrix::tn(std::size_t k) const {
  return total_ - tp(k) - fp(k) - fn(k);
}

BinaryRates rates_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  BinaryRates r{.tp = tp, .fp = fp, .fn = fn, .tn = tn};
  r.tpr = ratio(tp, tp + fn);
  r.fnr = ratio(fn, tp + fn);
  r.tnr = ratio(tn, tn + fp);
  r.fpr = ratio(fp, tn + fp);
  r.ppv = ratio(tp, tp + fp);
  r.fdr = ratio(fp, tp + fp);
  r.npv = ratio(tn, tn + fn);
  r.f1 = ratio(2 * tp, 2 * tp + fp + fn);
  return r;
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax_rows expects [n, C]");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  std::vector<double> out(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = logits.data().subspan(i * c, c);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += out[i * c + k] = std::exp(row[k] - mx);
    for (std::size_t k = 0; k < c; ++k) out[i * c + k] /= z;
  }
  return Tensor(logits.shape(), std::move(out));
}

std::optional<double> binary_auc(std::span<const double> scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw ShapeError("score and label counts differ");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  // Mid-ranks (1-based, doubled to stay integral) of tied groups.
  double pos_rank_sum2 = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid2 = static_cast<double>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        pos_rank_sum2 += mid2;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  const double p = static_cast<double>(pos);
  return (pos_rank_sum2 / 2.0 - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double roc_auc(const Tensor& scores, std::span<const std::uint32_t> labels) {
  if (scores.rank() != 2 || scores.dim(0) != labels.size()) {
    throw ShapeError("roc_auc expects [n, C] scores and n labels");
  }
  const std::size_t n = scores.dim(0), c = scores.dim(1);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < c; ++k) s += scores[i * c + k];
    if (std::abs(s - 1.0) > 1e-6) throw ValidationError("score rows must sum to 1");
  }
  double sum = 0.0;
  std::size_t used = 0;
  std::vector<double> column(n);
  std::vector<bool> flags(n);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = scores[i * c + k];
      flags[i] = labels[i] == k;
    }
    if (auto a = binary_auc(column, flags)) {
      sum += *a;
      ++used;
    }
  }
  if (used == 0) throw ValidationError("roc_auc: no class has both positives and negatives");
  return sum / static_cast<double>(used);
}

ClassificationReport classification_report(const Tensor& logits,
                                           std::span<const std::uint32_t> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("classification_report expects [n, C] logits and n labels");
  }
  if (labels.empty()) throw ValidationError("classification_report on an empty dataset");
  const std::size_t n = labels.size(), c = logits.dim(1);
  const std::vector<std::uint32_t> pred = predicted_classes(logits);
  const ConfusionMatrix cm(labels, pred, c);

  ClassificationReport r;
  r.n = n;
  r.accuracy = static_cast<double>(cm.correct()) / static_cast<double>(n);

  // Summed in sorted order so that the loss does not depend on sample order.
  std::vector<double> losses(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = logits.data().subspan(i * c, c);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    losses[i] = mx + std::log(z) - row[labels[i]];
  }
  std::sort(losses.begin(), losses.end());
  r.loss = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(n);

  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t k = 0; k < c; ++k) {
    r.per_class.push_back(rates_from_counts(cm.tp(k), cm.fp(k), cm.fn(k), cm.tn(k)));
    tp += cm.tp(k), fp += cm.fp(k), fn += cm.fn(k), tn += cm.tn(k);
  }
  const BinaryRates micro = rates_from_counts(tp, fp, fn, tn);
  // Summed TP + FN is n, so micro TPR is the accuracy quotient itself.
  r.micro = {*micro.tpr, *micro.tnr, *micro.ppv, *micro.npv,
             *micro.fpr, *micro.fnr, *micro.fdr, *micro.f1};

  std::size_t& na = r.na_count;
  r.macro.tpr = mean_defined(r.per_class, &BinaryRates::tpr, na);
  r.macro.tnr = mean_defined(r.per_class, &BinaryRates::tnr, na);
  r.macro.ppv = mean_defined(r.per_class, &BinaryRates::ppv, na);
  r.macro.npv = mean_defined(r.per_class, &BinaryRates::npv, na);
  r.macro.fpr = mean_defined(r.per_class, &BinaryRates::fpr, na);
  r.macro.fnr = mean_defined(r.per_class, &BinaryRates::fnr, na);
  r.macro.fdr = mean_defined(r.per_class, &BinaryRates::fdr, na);
  r.macro.f1 = mean_defined(r.per_class, &BinaryRates::f1, na);
  r.precision = r.macro.ppv;
  r.recall = r.macro.tpr;
  r.f1 = r.macro.f1;

  const Tensor probs = softmax_rows(logits);
  std::vector<double> column(n);
  std::vector<bool> positive(n);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = probs[i * c + k];
      positive[i] = labels[i] == k;
    }
    r.per_class_auc.push_back(binary_auc(column, positive));
  }
  if (std::any_of(r.per_class_auc.begin(), r.per_class_auc.end(),
                  [](const auto& a) { return a.has_value(); })) {
    r.roc_auc = roc_auc(probs, labels);
  }
  return r;
}

ClassificationReport classification_report(const Model& model, const LabeledDataset& dataset) {
  if (dataset.empty()) throw ValidationError("classification_report on an empty dataset");
  if (dataset.num_classes() != model.num_classes()) {
    throw ValidationError("dataset has " + std::to_string(dataset.num_classes()) +
                          " classes, model " + model.name() + " has " +
                          std::to_string(model.num_classes()));
  }
  return classification_report(predict_logits(model, dataset.inputs()), dataset.labels());
}

Tensor AdversarialBatch::perturbation() const {
  if (clean.shape() != adversarial.shape()) throw ShapeError("adversarial batch shapes differ");
  std::vector<double> d(clean.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = adversarial[i] - clean[i];
  return Tensor(clean.shape(), std::move(d));
}

double attack_success_rate(const AdversarialBatch& batch, const Model& target) {
  if (batch.size() == 0) throw ValidationError("attack_success_rate on an empty batch");
  if (batch.source_correct.size() != batch.size()) {
    throw ShapeError("adversarial batch flags do not match its size");
  }
  const std::vector<std::uint32_t> pred =
      predicted_classes(predict_logits(target, batch.adversarial));
  std::size_t eligible = 0, fooled = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch.source_correct[i]) continue;
    ++eligible;
    fooled += pred[i] != batch.labels[i];
  }
  if (eligible == 0) {
    throw ValidationError("no sample in the batch is classified correctly by the source model");
  }
  return static_cast<double>(fooled) / static_cast<double>(eligible);
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // no "-0.000000"
  return fmt::format("{:.6f}", v);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : "N/A";
}

std::string report_metric_header() {
  return "Accuracy,Loss Value,TPR,TNR,PPV,NPV,FPR,FNR,FDR,ROC_AUC,Precision,Recall,F1-Score,"
         "N/A Count";
}

std::string report_csv_header() { return "Name,Averaging," + report_metric_header(); }

namespace {

std::string summary_cells(const ClassificationReport& r, const RateSummary& s) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}", format_number(r.accuracy),
                     format_number(r.loss), format_number(s.tpr), format_number(s.tnr),
                     format_number(s.ppv), format_number(s.npv), format_number(s.fpr),
                     format_number(s.fnr), format_number(s.fdr), format_optional(r.roc_auc),
                     format_number(s.ppv), format_number(s.tpr), format_number(s.f1),
                     r.na_count);
}

std::string summary_row(const std::string& label, const char* averaging,
                        const ClassificationReport& r, const RateSummary& s) {
  return fmt::format("{},{},{}", label, averaging, summary_cells(r, s));
}

}  // namespace

std::string report_metric_cells(const ClassificationReport& report) {
  return summary_cells(report, report.macro);
}

std::string report_csv_row(const std::string& label, const ClassificationReport& report) {
  return summary_row(label, "macro", report, report.macro);
}

std::vector<std::string> report_csv_rows(const std::string& label,
                                         const ClassificationReport& report) {
  std::vector<std::string> rows{report_csv_row(label, report),
                                summary_row(label, "micro", report, report.micro)};
  for (std::size_t k = 0; k < report.per_class.size(); ++k) {
    const BinaryRates& b = report.per_class[k];
    std::size_t na = 0;
    for (const auto* f : {&b.tpr, &b.tnr, &b.ppv, &b.npv, &b.fpr, &b.fnr, &b.fdr, &b.f1}) {
      na += !f->has_value();
    }
    const double acc = static_cast<double>(b.tp + b.tn) / static_cast<double>(report.n);
    rows.push_back(fmt::format(
        "{},class {},{},,{},{},{},{},{},{},{},{},{},{},{},{}", label, k, format_number(acc),
        format_optional(b.tpr), format_optional(b.tnr), format_optional(b.ppv),
        format_optional(b.npv), format_optional(b.fpr), format_optional(b.fnr),
        format_optional(b.fdr), format_optional(report.per_class_auc[k]),
        format_optional(b.ppv), format_optional(b.tpr), format_optional(b.f1), na));
  }
  return rows;
}

}  // namespace compass
