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

#include <set>

#include "compass/binary_io.h"
#include "compass/dataset.h"
#include "compass/errors.h"
#include "compass/paths.h"

namespace compass {
namespace {

std::vector<std::uint64_t> sequential_ids(std::size_t n) {
  std::vector<std::uint64_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

}  // namespace

LabeledDataset::LabeledDataset(Tensor inputs, std::vector<std::uint32_t> labels,
                               std::size_t num_classes)
    : LabeledDataset(std::move(inputs), labels, num_classes, sequential_ids(labels.size())) {}

LabeledDataset::LabeledDataset(Tensor inputs, std::vector<std::uint32_t> labels,
                               std::size_t num_classes, std::vector<std::uint64_t> ids)
    : inputs_(std::move(inputs)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      ids_(std::move(ids)) {
  validate();
}

void LabeledDataset::validate() const {
  if (num_classes_ < 2) throw ShapeError("dataset needs at least 2 classes");
  if (inputs_.rank() < 2) throw ShapeError("dataset inputs need a sample axis and a sample shape");
  if (inputs_.dim(0) != labels_.size()) {
    throw ShapeError("dataset has " + std::to_string(inputs_.dim(0)) + " inputs but " +
                     std::to_string(labels_.size()) + " labels");
  }
  if (ids_.size() != labels_.size()) throw ShapeError("dataset id count differs from label count");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= num_classes_) {
      throw ShapeError("label " + std::to_string(labels_[i]) + " of sample " +
                       std::to_string(i) + " is out of range for " +
                       std::to_string(num_classes_) + " classes");
    }
  }
  for (double v : inputs_.data()) {
    if (v < 0.0 || v > 1.0) throw ShapeError("dataset input value outside [0,1]");
  }
  if (std::set<std::uint64_t>(ids_.begin(), ids_.end()).size() != ids_.size()) {
    throw ShapeError("dataset ids are not unique");
  }
}

Shape LabeledDataset::sample_shape() const {
  return Shape(inputs_.shape().begin() + 1, inputs_.shape().end());
}

LabeledDataset LabeledDataset::select(std::span<const std::size_t> indices) const {
  const std::size_t stride = sample_size();
  std::vector<double> data;
  data.reserve(indices.size() * stride);
  std::vector<std::uint32_t> labels;
  std::vector<std::uint64_t> ids;
  for (std::size_t i : indices) {
    if (i >= size()) throw ShapeError("sample index out of range");
    auto row = inputs_.data().subspan(i * stride, stride);
    data.insert(data.end(), row.begin(), row.end());
    labels.push_back(labels_[i]);
    ids.push_back(ids_[i]);
  }
  Shape shape = inputs_.shape();
  shape[0] = indices.size();
  return LabeledDataset(Tensor(std::move(shape), std::move(data)), std::move(labels),
                        num_classes_, std::move(ids));
}

LabeledDataset LabeledDataset::head(std::size_t n) const {
  std::vector<std::size_t> idx(std::min(n, size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return select(idx);
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
  const nlohmann::ordered_json m = read_json(dir / "manifest");
  auto fail = [&](const std::string& why) -> FormatError {
    return FormatError(dir.string() + ": " + why);
  };
  if (!m.is_object()) throw fail("manifest is not an object");
  if (!m.contains("format_version") || m["format_version"] != kDatasetFormatVersion) {
    throw fail("unsupported dataset format version");
  }
  for (const char* key : {"n", "num_classes"}) {
    if (!m.contains(key) || !m[key].is_number_unsigned()) {
      throw fail(std::string("manifest lacks '") + key + "'");
    }
  }
  if (!m.contains("input_shape") || !m["input_shape"].is_array() || m["input_shape"].empty()) {
    throw fail("manifest lacks 'input_shape'");
  }
  const std::size_t n = m["n"].get<std::size_t>();
  Shape shape{n};
  for (const auto& d : m["input_shape"]) {
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) throw fail("bad input_shape");
    shape.push_back(d.get<std::size_t>());
  }
  std::vector<double> data = read_f32(dir / "data.bin", shape_size(shape));
  std::vector<std::uint32_t> labels = read_u32(dir / "labels.bin");
  if (labels.size() != n) {
    throw fail("labels.bin holds " + std::to_string(labels.size()) + " labels, manifest says " +
               std::to_string(n));
  }
  std::vector<std::uint64_t> ids = sequential_ids(n);
  if (std::filesystem::exists(dir / "ids.bin")) {
    ids = read_u64(dir / "ids.bin");
    if (ids.size() != n) throw fail("ids.bin length disagrees with manifest");
  }
  try {
    return LabeledDataset(Tensor(std::move(shape), std::move(data)), std::move(labels),
                          m["num_classes"].get<std::size_t>(), std::move(ids));
  } catch (const ShapeError& e) {
    throw fail(e.what());
  }
}

void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json m;
  m["format_version"] = kDatasetFormatVersion;
  m["n"] = dataset.size();
  m["input_shape"] = dataset.sample_shape();
  m["num_classes"] = dataset.num_classes();
  write_json(dir / "manifest", m);
  write_f32(dir / "data.bin", dataset.inputs().data());
  write_u32(dir / "labels.bin", dataset.labels());
  if (dataset.ids() != sequential_ids(dataset.size())) {
    write_u64(dir / "ids.bin", dataset.ids());
  } else {
    std::filesystem::remove(dir / "ids.bin");
  }
}

LabeledDataset reference_dataset(const std::string& split) {
  if (split != "train" && split != "test") {
    throw ValidationError("unknown split '" + split + "' (expected train or test)");
  }
  return load_dataset(default_fixture_dir() / ("synth8x8_" + split));
}

}  // namespace compass
