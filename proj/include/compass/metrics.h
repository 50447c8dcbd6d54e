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

#include "compass/dataset.h"
#include "compass/model.h"
#include "compass/tensor.h"

namespace compass {

// counts[true][predicted]
class ConfusionMatrix {
 public:
  ConfusionMatrix(std::span<const std::uint32_t> labels,
                  std::span<const std::uint32_t> predictions, std::size_t num_classes);

  std::size_t num_classes() const { return c_; }
  std::size_t total() const { return total_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * c_ + predicted]; }
  std::size_t correct() const;

  // One-vs-rest counts for class k.
  std::size_t tp(std::size_t k) const;
  std::size_t fp(std::size_t k) const;
  std::size_t fn(std::size_t k) const;
  std::size_t tn(std::size_t k) const;

 private:
  std::size_t c_;
  std::size_t total_ = 0;
  std::vector<std::size_t> counts_;
};

// Rates of one one-vs-rest problem. A rate is empty when its denominator is 0.
struct BinaryRates {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::optional<double> tpr{};
  std::optional<double> tnr{};
  std::optional<double> ppv{};
  std::optional<double> npv{};
  std::optional<double> fpr{};
  std::optional<double> fnr{};
  std::optional<double> fdr{};
  std::optional<double> f1{};
};

BinaryRates rates_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);

struct RateSummary {
  double tpr = 0, tnr = 0, ppv = 0, npv = 0, fpr = 0, fnr = 0, fdr = 0, f1 = 0;
};

struct ClassificationReport {
  std::size_t n = 0;
  double accuracy = 0;
  double loss = 0;  // mean cross-entropy, natural log
  RateSummary micro;
  RateSummary macro;
  // Macro one-vs-rest; empty when every sample has the same label.
  std::optional<double> roc_auc;
  double precision = 0;  // macro PPV
  double recall = 0;     // macro TPR
  double f1 = 0;         // macro F1
  // Per-class rates left out of the macro means for lack of a denominator.
  std::size_t na_count = 0;
  std::vector<BinaryRates> per_class;
  std::vector<std::optional<double>> per_class_auc;
};

ClassificationReport classification_report(const Model& model, const LabeledDataset& dataset);
ClassificationReport classification_report(const Tensor& logits,
                                           std::span<const std::uint32_t> labels);

// Row-wise softmax of [n, C] logits.
Tensor softmax_rows(const Tensor& logits);

// Macro one-vs-rest AUC over classes with both positives and negatives.
// scores: [n, C] probabilities whose rows sum to 1 (within 1e-6).
double roc_auc(const Tensor& scores, std::span<const std::uint32_t> labels);
// Rank-statistic AUC of a single score column; ties count one half.
// Empty when either side has no samples.
std::optional<double> binary_auc(std::span<const double> scores, const std::vector<bool>& positive);

// Adversarial examples together with what is needed to score them.
struct AdversarialBatch {
  Tensor clean;        // [n, sample_shape...]
  Tensor adversarial;  // same shape
  std::vector<std::uint32_t> labels;
  std::vector<std::uint64_t> ids;
  // Whether the source model classified the clean sample correctly. Only
  // those samples enter the success rate.
  std::vector<bool> source_correct;
  std::string source_model{};
  std::string method{};

  std::size_t size() const { return labels.size(); }
  // adversarial - clean
  Tensor perturbation() const;
};

// Fraction of source-correct samples whose adversarial version the target
// model misclassifies. Throws ValidationError when no sample qualifies.
double attack_success_rate(const AdversarialBatch& batch, const Model& target);

// CSV in the column order Accuracy, Loss Value, TPR, TNR, PPV, NPV, FPR, FNR,
// FDR, ROC_AUC, Precision, Recall, F1-Score, prefixed by a row label and an
// averaging column. report_csv_rows emits the macro row, the micro row and
// one row per class.
std::string report_csv_header();
std::vector<std::string> report_csv_rows(const std::string& label,
                                         const ClassificationReport& report);
// Macro row only.
std::string report_csv_row(const std::string& label, const ClassificationReport& report);
// The metric columns alone (Accuracy .. N/A Count), macro-averaged, for
// tables that carry their own leading columns.
std::string report_metric_header();
std::string report_metric_cells(const ClassificationReport& report);

// Fixed-precision number formatting shared by every CSV the toolkit writes.
std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);

}  // namespace compass
