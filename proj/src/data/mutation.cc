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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "compass/dataset.h"
#include "compass/errors.h"
#include "compass/random.h"

namespace compass {
namespace {

// Stream tags keep the draws of different decisions independent.
enum Stream : std::uint32_t {
  kFlip = 1,
  kFlipTarget,
  kMissingTop,
  kMissingLeft,
  kShuffleKey,
  kRepeatKey,
  kNoise,
  kCropTop,
  kCropLeft,
};

constexpr MutationKind kAllKinds[] = {
    MutationKind::kLabelError,    MutationKind::kDataMissing,  MutationKind::kDataShuffle,
    MutationKind::kDataRepetition, MutationKind::kNoisePerturb, MutationKind::kContrastRatio,
    MutationKind::kBrightness,    MutationKind::kRandomCropping,
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// ceil that ignores floating-point dust just above an integer.
std::size_t ceil_count(double v) {
  return static_cast<std::size_t>(std::ceil(v - 1e-9));
}

struct Spatial {
  std::size_t planes;  // product of the axes in front of H and W
  std::size_t h;
  std::size_t w;
};

Spatial spatial_of(const LabeledDataset& d, MutationKind kind) {
  const Shape s = d.sample_shape();
  if (s.size() < 2) {
    throw ValidationError(std::string(mutation_name(kind)) +
                          " needs samples with two spatial axes");
  }
  const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
  return {shape_size(s) / (h * w), h, w};
}

// Zero every pixel of each plane for which keep(row, col) is false.
template <typename Keep>
void mask_planes(std::span<double> sample, const Spatial& sp, Keep keep) {
  for (std::size_t p = 0; p < sp.planes; ++p) {
    for (std::size_t r = 0; r < sp.h; ++r) {
      for (std::size_t c = 0; c < sp.w; ++c) {
        if (!keep(r, c)) sample[(p * sp.h + r) * sp.w + c] = 0.0;
      }
    }
  }
}

std::vector<std::size_t> order_by_key(const LabeledDataset& d, const CounterRng& rng,
                                      std::uint32_t stream) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> keys(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    keys[i] = {rng.bits64(d.ids()[i], stream, 0), d.ids()[i]};
  }
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return idx;
}

}  // namespace

const char* mutation_name(MutationKind kind) {
  switch (kind) {
    case MutationKind::kLabelError: return "label-error";
    case MutationKind::kDataMissing: return "data-missing";
    case MutationKind::kDataShuffle: return "data-shuffle";
    case MutationKind::kDataRepetition: return "data-repetition";
    case MutationKind::kNoisePerturb: return "noise-perturb";
    case MutationKind::kContrastRatio: return "contrast-ratio";
    case MutationKind::kBrightness: return "brightness";
    case MutationKind::kRandomCropping: return "random-cropping";
  }
  return "?";
}

MutationKind parse_mutation_kind(const std::string& name) {
  for (MutationKind k : kAllKinds) {
    if (name == mutation_name(k)) return k;
  }
  throw ValidationError("unknown mutation kind '" + name + "'");
}

double default_intensity(MutationKind kind) {
  switch (kind) {
    case MutationKind::kLabelError: return 0.1;
    case MutationKind::kDataMissing: return 0.25;
    case MutationKind::kDataShuffle: return 0.0;
    case MutationKind::kDataRepetition: return 0.1;
    case MutationKind::kNoisePerturb: return 0.1;
    case MutationKind::kContrastRatio: return 1.5;
    case MutationKind::kBrightness: return 0.1;
    case MutationKind::kRandomCropping: return 0.25;
  }
  return 0.0;
}

std::vector<MutationKind> default_mutation_kinds() {
  return {MutationKind::kLabelError,   MutationKind::kDataMissing,
          MutationKind::kDataShuffle,  MutationKind::kNoisePerturb,
          MutationKind::kContrastRatio, MutationKind::kBrightness,
          MutationKind::kRandomCropping};
}

void validate_mutation(const MutationSpec& spec) {
  const double p = spec.intensity;
  auto reject = [&](const char* range) {
    throw ValidationError(std::string(mutation_name(spec.kind)) + " intensity " +
                          std::to_string(p) + " outside " + range);
  };
  if (!std::isfinite(p)) reject("the finite numbers");
  switch (spec.kind) {
    case MutationKind::kLabelError:
    case MutationKind::kDataMissing:
    case MutationKind::kDataRepetition:
    case MutationKind::kRandomCropping:
      if (p < 0.0 || p > 1.0) reject("[0, 1]");
      break;
    case MutationKind::kNoisePerturb:
    case MutationKind::kContrastRatio:
      if (p < 0.0) reject("[0, inf)");
      break;
    case MutationKind::kBrightness:
      if (p < -1.0 || p > 1.0) reject("[-1, 1]");
      break;
    case MutationKind::kDataShuffle:
      break;  // intensity unused
  }
}

LabeledDataset mutate(const LabeledDataset& dataset, const MutationSpec& spec) {
  validate_mutation(spec);
  const bool pixelwise =
      spec.kind == MutationKind::kContrastRatio || spec.kind == MutationKind::kBrightness;
  if (dataset.empty()) {
    if (pixelwise) return dataset;
    throw ValidationError(std::string(mutation_name(spec.kind)) + " needs a non-empty dataset");
  }
  const CounterRng rng(spec.seed);
  const std::size_t n = dataset.size();
  const std::size_t stride = dataset.sample_size();
  const double p = spec.intensity;

  switch (spec.kind) {
    case MutationKind::kDataShuffle: {
      const std::vector<std::size_t> order = order_by_key(dataset, rng, kShuffleKey);
      return dataset.select(order);
    }
    case MutationKind::kDataRepetition: {
      const std::size_t count = std::min(n, ceil_count(p * static_cast<double>(n)));
      std::vector<std::size_t> chosen = order_by_key(dataset, rng, kRepeatKey);
      chosen.resize(count);
      std::sort(chosen.begin(), chosen.end());
      std::vector<double> data(dataset.inputs().data().begin(), dataset.inputs().data().end());
      std::vector<std::uint32_t> labels = dataset.labels();
      std::vector<std::uint64_t> ids = dataset.ids();
      std::uint64_t next = *std::max_element(ids.begin(), ids.end()) + 1;
      for (std::size_t i : chosen) {
        auto row = dataset.inputs().data().subspan(i * stride, stride);
        data.insert(data.end(), row.begin(), row.end());
        labels.push_back(dataset.labels()[i]);
        ids.push_back(next++);
      }
      Shape shape = dataset.inputs().shape();
      shape[0] = labels.size();
      return LabeledDataset(Tensor(std::move(shape), std::move(data)), std::move(labels),
                            dataset.num_classes(), std::move(ids));
    }
    case MutationKind::kLabelError: {
      std::vector<std::uint32_t> labels = dataset.labels();
      const std::uint64_t others = dataset.num_classes() - 1;
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t id = dataset.ids()[i];
        if (!(rng.uniform(id, kFlip, 0) < p)) continue;
        auto pick = static_cast<std::uint32_t>(rng.below(others, id, kFlipTarget, 0));
        labels[i] = pick >= labels[i] ? pick + 1 : pick;
      }
      return LabeledDataset(dataset.inputs(), std::move(labels), dataset.num_classes(),
                            dataset.ids());
    }
    default:
      break;
  }

  // Pixel mutations: the sample set and labels are unchanged.
  std::vector<double> data(dataset.inputs().data().begin(), dataset.inputs().data().end());
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t id = dataset.ids()[i];
    std::span<double> sample(data.data() + i * stride, stride);
    switch (spec.kind) {
      case MutationKind::kNoisePerturb:
        for (std::size_t j = 0; j < stride; ++j) {
          sample[j] = clamp01(sample[j] + p * rng.normal(id, kNoise, static_cast<std::uint32_t>(j)));
        }
        break;
      case MutationKind::kBrightness:
        for (double& v : sample) v = clamp01(v + p);
        break;
      case MutationKind::kContrastRatio: {
        double mean = 0.0;
        for (double v : sample) mean += v;
        mean /= static_cast<double>(stride);
        for (double& v : sample) v = clamp01(mean + p * (v - mean));
        break;
      }
      case MutationKind::kDataMissing: {
        const Spatial sp = spatial_of(dataset, spec.kind);
        const double side = std::sqrt(p);
        const auto rh = static_cast<std::size_t>(std::lround(side * static_cast<double>(sp.h)));
        const auto rw = static_cast<std::size_t>(std::lround(side * static_cast<double>(sp.w)));
        const std::size_t top = rng.below(sp.h - rh + 1, id, kMissingTop, 0);
        const std::size_t left = rng.below(sp.w - rw + 1, id, kMissingLeft, 0);
        mask_planes(sample, sp, [&](std::size_t r, std::size_t c) {
          return r < top || r >= top + rh || c < left || c >= left + rw;
        });
        break;
      }
      case MutationKind::kRandomCropping: {
        const Spatial sp = spatial_of(dataset, spec.kind);
        const double side = std::sqrt(1.0 - p);
        const std::size_t wh = ceil_count(side * static_cast<double>(sp.h));
        const std::size_t ww = ceil_count(side * static_cast<double>(sp.w));
        const std::size_t top = rng.below(sp.h - wh + 1, id, kCropTop, 0);
        const std::size_t left = rng.below(sp.w - ww + 1, id, kCropLeft, 0);
        mask_planes(sample, sp, [&](std::size_t r, std::size_t c) {
          return r >= top && r < top + wh && c >= left && c < left + ww;
        });
        break;
      }
      default:
        break;
    }
  }
  return LabeledDataset(Tensor(dataset.inputs().shape(), std::move(data)), dataset.labels(),
                        dataset.num_classes(), dataset.ids());
}

}  // namespace compass
