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

#include "compass/dataset.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>

#include "compass/binary_io.h"
#include "compass/errors.h"

namespace compass {
namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("compass_dataset_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

LabeledDataset tiny(std::vector<std::uint32_t> labels, std::size_t classes = 2) {
  const std::size_t n = labels.size();
  std::vector<double> data(n * 4);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>(i % 10) / 10.0;
  return LabeledDataset(Tensor({n, 1, 2, 2}, std::move(data)), std::move(labels), classes);
}

TEST(DatasetIo, RoundTripOfBundledSet) {
  const LabeledDataset d = reference_dataset("test");
  EXPECT_EQ(d.size(), 200u);
  EXPECT_EQ(d.sample_shape(), (Shape{1, 8, 8}));
  const auto dir = scratch_dir("roundtrip");
  save_dataset(d, dir);
  const LabeledDataset back = load_dataset(dir);
  EXPECT_EQ(back.labels(), d.labels());
  EXPECT_EQ(back.ids(), d.ids());
  EXPECT_EQ(back.inputs(), d.inputs());  // already f32 values
  EXPECT_FALSE(std::filesystem::exists(dir / "ids.bin"));
}

TEST(DatasetIo, InputsQuantizedToFloat32AndIdsKept) {
  const LabeledDataset d(Tensor({2, 1, 1, 2}, {0.1, 1.0 / 3.0, 0.0, 1.0}), {1, 0}, 2, {7, 3});
  const auto dir = scratch_dir("quant");
  save_dataset(d, dir);
  const LabeledDataset back = load_dataset(dir);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(back.inputs()[i], static_cast<double>(static_cast<float>(d.inputs()[i])));
  }
  EXPECT_EQ(back.ids(), (std::vector<std::uint64_t>{7, 3}));
}

TEST(DatasetIo, LabelOutOfRange) {
  const auto dir = scratch_dir("label");
  save_dataset(tiny({0, 1, 0}), dir);
  write_u32(dir / "labels.bin", std::vector<std::uint32_t>{0, 2, 0});
  EXPECT_THROW(load_dataset(dir), FormatError);
}

TEST(DatasetIo, BlobLengthMismatch) {
  const auto dir = scratch_dir("blob");
  save_dataset(tiny({0, 1, 0}), dir);
  std::filesystem::resize_file(dir / "data.bin", 4 * 5);
  EXPECT_THROW(load_dataset(dir), FormatError);
  save_dataset(tiny({0, 1, 0}), dir);
  write_u32(dir / "labels.bin", std::vector<std::uint32_t>{0, 1});
  EXPECT_THROW(load_dataset(dir), FormatError);
}

TEST(DatasetIo, EmptyDatasetIsValid) {
  const LabeledDataset empty(Tensor({0, 1, 2, 2}, std::vector<double>{}), {}, 3);
  const auto dir = scratch_dir("empty");
  save_dataset(empty, dir);
  const LabeledDataset back = load_dataset(dir);
  EXPECT_TRUE(back.empty());
  EXPECT_EQ(back.sample_shape(), (Shape{1, 2, 2}));
  EXPECT_EQ(back.num_classes(), 3u);
}

TEST(DatasetInvariants, Rejections) {
  EXPECT_THROW(LabeledDataset(Tensor({1, 2}, {0.5, 1.5}), {0}, 2), ShapeError);
  EXPECT_THROW(LabeledDataset(Tensor({1, 2}, {0.5, 0.5}), {2}, 2), ShapeError);
  EXPECT_THROW(LabeledDataset(Tensor({2, 2}, 0.5), {0}, 2), ShapeError);
  EXPECT_THROW(LabeledDataset(Tensor({2, 2}, 0.5), {0, 1}, 2, {4, 4}), ShapeError);
}

TEST(Mutate, NoiseWithZeroSigmaIsIdentity) {
  const LabeledDataset d = reference_dataset("test");
  EXPECT_EQ(mutate(d, {MutationKind::kNoisePerturb, 0.0, 5}), d);
}

TEST(Mutate, BrightnessClamps) {
  const LabeledDataset d(Tensor({1, 1, 1, 2}, {0.9, 0.3}), {0}, 2);
  const LabeledDataset out = mutate(d, {MutationKind::kBrightness, 0.2, 1});
  EXPECT_EQ(out.inputs()[0], 1.0);
  EXPECT_DOUBLE_EQ(out.inputs()[1], 0.5);
}

TEST(Mutate, LabelErrorBinaryForcedFlip) {
  const LabeledDataset out = mutate(tiny({0, 1, 0}), {MutationKind::kLabelError, 1.0, 9});
  EXPECT_EQ(out.labels(), (std::vector<std::uint32_t>{1, 0, 1}));
}

TEST(Mutate, LabelErrorNeverKeepsLabelAndHitsRoughlyP) {
  const LabeledDataset d = reference_dataset("train");
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const LabeledDataset all = mutate(d, {MutationKind::kLabelError, 1.0, seed});
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NE(all.labels()[i], d.labels()[i]);
    const LabeledDataset some = mutate(d, {MutationKind::kLabelError, 0.3, seed});
    std::size_t changed = 0;
    for (std::size_t i = 0; i < d.size(); ++i) changed += some.labels()[i] != d.labels()[i];
    // Binomial(400, 0.3): mean 120, sd ~9.2.
    EXPECT_GT(changed, 80u);
    EXPECT_LT(changed, 160u);
  }
}

TEST(Mutate, ShufflePreservesPairsAndSortsBack) {
  const LabeledDataset d = reference_dataset("test");
  const LabeledDataset s = mutate(d, {MutationKind::kDataShuffle, 0.0, 11});
  EXPECT_NE(s.ids(), d.ids());
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.ids()[a] < s.ids()[b]; });
  EXPECT_EQ(s.select(order), d);
}

TEST(Mutate, RepetitionAppendsCeilPN) {
  const LabeledDataset d = tiny({0, 1, 0, 1, 1, 0, 0, 1, 1, 0});
  const LabeledDataset out = mutate(d, {MutationKind::kDataRepetition, 0.3, 4});
  ASSERT_EQ(out.size(), 13u);
  EXPECT_EQ(out.head(10), d);
  std::map<std::uint64_t, std::size_t> by_id;
  for (std::size_t i = 0; i < 10; ++i) by_id[d.ids()[i]] = i;
  for (std::size_t k = 10; k < 13; ++k) {
    EXPECT_EQ(out.ids()[k], k);  // fresh ids continue after the largest
    // Each copy equals some original sample.
    bool found = false;
    for (std::size_t i = 0; i < 10; ++i) {
      if (out.input(k) == d.input(i) && out.labels()[k] == d.labels()[i]) found = true;
    }
    EXPECT_TRUE(found);
  }
  EXPECT_EQ(mutate(d, {MutationKind::kDataRepetition, 0.25, 4}).size(), 13u);
  EXPECT_EQ(mutate(d, {MutationKind::kDataRepetition, 0.0, 4}).size(), 10u);
}

TEST(Mutate, MissingZeroesARectangle) {
  const LabeledDataset d(Tensor({1, 1, 8, 8}, 0.5), {0}, 2);
  const LabeledDataset out = mutate(d, {MutationKind::kDataMissing, 0.25, 3});
  std::size_t zeros = 0, min_r = 8, max_r = 0, min_c = 8, max_c = 0;
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c)
      if (out.inputs()[r * 8 + c] == 0.0) {
        ++zeros;
        min_r = std::min(min_r, r), max_r = std::max(max_r, r);
        min_c = std::min(min_c, c), max_c = std::max(max_c, c);
      }
  EXPECT_EQ(zeros, 16u);
  EXPECT_EQ(max_r - min_r, 3u);
  EXPECT_EQ(max_c - min_c, 3u);
}

TEST(Mutate, CroppingKeepsAWindow) {
  const LabeledDataset d(Tensor({1, 1, 8, 8}, 0.5), {0}, 2);
  const LabeledDataset out = mutate(d, {MutationKind::kRandomCropping, 0.75, 3});
  std::size_t kept = 0;
  for (double v : out.inputs().data()) kept += v != 0.0;
  EXPECT_EQ(kept, 16u);  // window side ceil(0.5 * 8) = 4
  EXPECT_EQ(mutate(d, {MutationKind::kRandomCropping, 0.0, 3}), d);
}

TEST(Mutate, ContrastAroundImageMean) {
  const LabeledDataset d(Tensor({1, 1, 1, 4}, {0.2, 0.4, 0.6, 0.8}), {0}, 2);
  const LabeledDataset out = mutate(d, {MutationKind::kContrastRatio, 1.5, 0});
  const std::vector<double> expected{0.05, 0.35, 0.65, 0.95};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(out.inputs()[i], expected[i], 1e-15);
  EXPECT_EQ(mutate(d, {MutationKind::kContrastRatio, 1.0, 0}).inputs().values(),
            d.inputs().values());
}

TEST(Mutate, DeterministicInRangeAndSeedSensitive) {
  const LabeledDataset d = reference_dataset("test");
  for (MutationKind k : {MutationKind::kLabelError, MutationKind::kDataMissing,
                         MutationKind::kDataShuffle, MutationKind::kDataRepetition,
                         MutationKind::kNoisePerturb, MutationKind::kContrastRatio,
                         MutationKind::kBrightness, MutationKind::kRandomCropping}) {
    const MutationSpec spec{k, default_intensity(k), 77};
    const LabeledDataset a = mutate(d, spec);
    EXPECT_EQ(a, mutate(d, spec)) << mutation_name(k);
    for (double v : a.inputs().data()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
    const bool random = k != MutationKind::kContrastRatio && k != MutationKind::kBrightness;
    if (random) {
      EXPECT_NE(a, mutate(d, {k, spec.intensity, 78})) << mutation_name(k);
    }
  }
}

TEST(Mutate, PerSampleRandomnessFollowsIdsNotPositions) {
  const LabeledDataset d = reference_dataset("test");
  const LabeledDataset shuffled = mutate(d, {MutationKind::kDataShuffle, 0.0, 5});
  for (MutationKind k : {MutationKind::kNoisePerturb, MutationKind::kLabelError,
                         MutationKind::kDataMissing, MutationKind::kRandomCropping}) {
    const MutationSpec spec{k, default_intensity(k), 123};
    const LabeledDataset a = mutate(d, spec);
    const LabeledDataset b = mutate(shuffled, spec);
    for (std::size_t i = 0; i < b.size(); ++i) {
      const std::size_t orig = b.ids()[i];
      EXPECT_EQ(b.input(i), a.input(orig));
      EXPECT_EQ(b.labels()[i], a.labels()[orig]);
    }
  }
}

TEST(Mutate, RejectsIllegalIntensity) {
  const LabeledDataset d = tiny({0, 1});
  EXPECT_THROW(mutate(d, {MutationKind::kLabelError, 1.5, 0}), ValidationError);
  EXPECT_THROW(mutate(d, {MutationKind::kNoisePerturb, -0.1, 0}), ValidationError);
  EXPECT_THROW(mutate(d, {MutationKind::kBrightness, 1.1, 0}), ValidationError);
  EXPECT_THROW(mutate(d, {MutationKind::kContrastRatio, -1, 0}), ValidationError);
  EXPECT_THROW(mutate(d, {MutationKind::kDataMissing, NAN, 0}), ValidationError);
  EXPECT_THROW(parse_mutation_kind("blur"), ValidationError);
  EXPECT_EQ(parse_mutation_kind("random-cropping"), MutationKind::kRandomCropping);
}

TEST(Mutate, EmptyDataset) {
  const LabeledDataset empty(Tensor({0, 1, 2, 2}, std::vector<double>{}), {}, 2);
  EXPECT_THROW(mutate(empty, {MutationKind::kNoisePerturb, 0.1, 0}), ValidationError);
  EXPECT_TRUE(mutate(empty, {MutationKind::kBrightness, 0.1, 0}).empty());
}

}  // namespace
}  // namespace compass
