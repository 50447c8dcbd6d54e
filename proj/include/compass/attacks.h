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
#include <span>
#include <string>
#include <vector>

#include "compass/dataset.h"
#include "compass/metrics.h"
#include "compass/model.h"

namespace compass {

enum class AttackMethod { kFgsm, kIFgsm, kMiFgsm, kDiFgsm, kTiFgsm, kSiniFgsm, kPgd };

const char* attack_name(AttackMethod method);
// Throws ValidationError for unknown names.
AttackMethod parse_attack_method(const std::string& name);

// Untargeted L-inf attacks on cross-entropy of the true label. Inputs live
// in [0,1]. Fields that a method does not use are ignored.
struct AttackConfig {
  AttackMethod method = AttackMethod::kIFgsm;
  double epsilon = 8.0 / 255.0;
  double alpha = 2.0 / 255.0;  // step size of iterative methods
  std::size_t steps = 10;
  double momentum = 1.0;  // mi-fgsm and sini-fgsm
  double diversity_prob = 0.5;  // di-fgsm
  double resize_min = 0.9;  // di-fgsm: smallest resized side, as a fraction
  std::size_t kernel_size = 5;  // ti-fgsm, odd
  std::size_t scale_copies = 5;  // sini-fgsm
  bool random_start = true;  // pgd
  std::uint64_t seed = 0;
};

// The defaults above with `method` set.
AttackConfig default_attack_config(AttackMethod method);
// Throws ValidationError on out-of-range fields.
void validate_attack(const AttackConfig& config);

// Single step x' = clamp(x + eps * sign(grad), 0, 1), sign(0) = 0.
AdversarialBatch fgsm(const Model& model, const LabeledDataset& batch, const AttackConfig& config);
// i-, mi-, di-, ti- and sini-fgsm.
AdversarialBatch iterative_attack(const Model& model, const LabeledDataset& batch,
                                  const AttackConfig& config);
AdversarialBatch pgd(const Model& model, const LabeledDataset& batch, const AttackConfig& config);
// Dispatches on config.method.
AdversarialBatch run_attack(const Model& model, const LabeledDataset& batch,
                            const AttackConfig& config);

// Gaussian kernel used by ti-fgsm: k x k, sigma = k / 3, sums to 1.
std::vector<double> gaussian_kernel(std::size_t k);
// Per-plane convolution of [C,H,W] (or [H,W]) data with a centred k x k
// kernel; borders reflect half-sample symmetrically (d c b a | a b c d).
std::vector<double> convolve_reflect(std::span<const double> data, const Shape& sample_shape,
                                     std::span<const double> kernel, std::size_t k);

// ASR of one attack per method on each target model. Column j holds target j;
// a target that is the source itself gives the white-box cell.
struct TransferRow {
  std::string method;
  double white_box = 0;
  std::vector<double> asr;
};

struct TransferResult {
  std::string source;
  std::vector<std::string> targets;
  std::vector<TransferRow> rows;
  TransferRow average;  // mean over rows, method "Average"

  // Columns Source, Method, then one per target.
  std::string to_csv() const;
};

TransferResult evaluate_transfer(const Model& source, std::span<const Model* const> targets,
                                 const LabeledDataset& dataset,
                                 std::span<const AttackConfig> configs);

}  // namespace compass
