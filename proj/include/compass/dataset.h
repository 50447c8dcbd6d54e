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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "compass/tensor.h"

namespace compass {

// Inputs [n, sample_shape...] with values in [0,1], one label in [0, C) per
// sample and a stable id per sample. Ids are unique; they key per-sample
// randomness so that corruption does not depend on dataset order.
class LabeledDataset {
 public:
  // Ids default to 0..n-1.
  LabeledDataset(Tensor inputs, std::vector<std::uint32_t> labels, std::size_t num_classes);
  LabeledDataset(Tensor inputs, std::vector<std::uint32_t> labels, std::size_t num_classes,
                 std::vector<std::uint64_t> ids);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::size_t num_classes() const { return num_classes_; }
  // Per-sample shape, without the leading axis.
  Shape sample_shape() const;
  std::size_t sample_size() const { return shape_size(sample_shape()); }

  const Tensor& inputs() const { return inputs_; }
  const std::vector<std::uint32_t>& labels() const { return labels_; }
  const std::vector<std::uint64_t>& ids() const { return ids_; }

  // Sample i as a batch of one, shape {1, sample_shape...}.
  Tensor input(std::size_t i) const { return inputs_.slice_leading(i); }

  // The samples at `indices`, in that order.
  LabeledDataset select(std::span<const std::size_t> indices) const;
  // The first min(n, size()) samples.
  LabeledDataset head(std::size_t n) const;

  bool operator==(const LabeledDataset&) const = default;

 private:
  void validate() const;

  Tensor inputs_;
  std::vector<std::uint32_t> labels_;
  std::size_t num_classes_;
  std::vector<std::uint64_t> ids_;
};

// Directory with `manifest` (JSON: format_version, n, input_shape,
// num_classes), `data.bin` (f32 LE, sample-major), `labels.bin` (u32 LE) and
// optionally `ids.bin` (u64 LE).
inline constexpr int kDatasetFormatVersion = 1;

LabeledDataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir);

// The bundled 8x8 four-class synthetic splits.
LabeledDataset reference_dataset(const std::string& split);  // "train" or "test"

enum class MutationKind {
  kLabelError,
  kDataMissing,
  kDataShuffle,
  kDataRepetition,
  kNoisePerturb,
  kContrastRatio,
  kBrightness,
  kRandomCropping,
};

const char* mutation_name(MutationKind kind);
// Throws ValidationError for unknown names.
MutationKind parse_mutation_kind(const std::string& name);
double default_intensity(MutationKind kind);
// Mutants reported by default; data-repetition is available but opt-in.
std::vector<MutationKind> default_mutation_kinds();

struct MutationSpec {
  MutationKind kind = MutationKind::kNoisePerturb;
  double intensity = 0.1;
  std::uint64_t seed = 0;
};

// Throws ValidationError when the intensity is outside the kind's range.
void validate_mutation(const MutationSpec& spec);

// Deterministic corruption of `dataset`; see mutation_name() for the kinds.
//   label-error p      each sample w.p. p gets a uniformly chosen other label
//   data-missing p     a random rectangle covering ~p of each image is zeroed
//   data-shuffle       samples reordered, ids travel with them
//   data-repetition p  ceil(p*n) random samples appended again with new ids
//   noise-perturb s    x + N(0, s^2)
//   contrast-ratio c   mean + c * (x - mean), per image
//   brightness b       x + b
//   random-cropping p  keep a random window of side ceil(sqrt(1-p)*side)
// Pixel results are clamped to [0,1].
LabeledDataset mutate(const LabeledDataset& dataset, const MutationSpec& spec);

}  // namespace compass
