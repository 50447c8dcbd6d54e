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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compass/graph.h"
#include "compass/paths.h"
#include "compass/tensor.h"

namespace compass {

enum class LayerKind { kDense, kConv2d, kRelu, kMaxPool2d, kFlatten, kSoftmax };

const char* layer_kind_name(LayerKind kind);
// Throws FormatError for names it does not know.
LayerKind parse_layer_kind(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::size_t in = 0;   // dense: input features; conv2d: input channels
  std::size_t out = 0;  // dense: output features; conv2d: output channels
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t padding = 0;
  std::size_t pool = 0;  // max-pool2d window (and stride)

  static LayerSpec dense(std::size_t in, std::size_t out);
  static LayerSpec conv2d(std::size_t in_channels, std::size_t out_channels,
                          std::size_t kernel, std::size_t padding);
  static LayerSpec relu() { return {.kind = LayerKind::kRelu}; }
  static LayerSpec max_pool2d(std::size_t size) {
    return {.kind = LayerKind::kMaxPool2d, .pool = size};
  }
  static LayerSpec flatten() { return {.kind = LayerKind::kFlatten}; }

  bool has_params() const {
    return kind == LayerKind::kDense || kind == LayerKind::kConv2d;
  }
  bool operator==(const LayerSpec&) const = default;
};

// A feed-forward classifier producing raw logits.
//
// Parameters are stored per parametric layer as (weight, bias):
//   dense   weight [in, out], bias [out]
//   conv2d  weight [out, in, kh, kw], bias [out]
// Softmax is never part of the stored network output.
class Model {
 public:
  Model(std::string name, Shape input_shape, std::size_t num_classes,
        std::vector<LayerSpec> layers, std::vector<Tensor> params);

  const std::string& name() const { return name_; }
  const Shape& input_shape() const { return input_shape_; }
  std::size_t num_classes() const { return num_classes_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<Tensor>& params() const { return params_; }
  std::size_t param_count() const;

  // Index into params() of the weight of layer `layer` (bias follows it).
  // Empty for layers without parameters.
  std::optional<std::size_t> weight_index(std::size_t layer) const;

  // Per-sample output shape of every layer.
  std::vector<Shape> layer_shapes() const;

  Model with_params(std::vector<Tensor> params) const;
  Model renamed(std::string name) const;

 private:
  void validate() const;

  std::string name_;
  Shape input_shape_;
  std::size_t num_classes_;
  std::vector<LayerSpec> layers_;
  std::vector<Tensor> params_;
};

// The model unrolled into a Graph for a fixed batch size, with loss and
// logit-selection heads. Parameters are copied in; the Model is not
// referenced after construction.
class Network {
 public:
  Network(const Model& model, std::size_t batch);

  std::size_t batch() const { return batch_; }
  std::size_t num_classes() const { return num_classes_; }

  // inputs: [batch, input_shape...] -> logits [batch, C]
  const Tensor& logits(const Tensor& inputs);

  // Mean cross-entropy of the batch.
  double loss(const Tensor& inputs, std::span<const std::uint32_t> labels);
  // Mean cross-entropy plus its gradient with respect to the inputs and,
  // when `param_grads` is given, to every parameter (in Model::params order).
  double loss_gradient(const Tensor& inputs, std::span<const std::uint32_t> labels,
                       Tensor* input_grad, std::vector<Tensor>* param_grads = nullptr);
  // d logit[cls] / d input. Requires batch == 1. `param_grads` receives
  // d logit[cls] / d param for every parameter when given.
  Tensor logit_gradient(const Tensor& input, std::size_t cls,
                        std::vector<Tensor>* param_grads = nullptr);

  void set_param(std::size_t index, Tensor value);
  const Tensor& param(std::size_t index) const;
  std::size_t param_tensor_count() const { return params_.size(); }

  // Output of layer `layer` from the most recent forward pass.
  const Tensor& layer_output(std::size_t layer) const;

 private:
  Tensor one_hot(std::span<const std::uint32_t> labels) const;

  Graph graph_;
  std::size_t batch_;
  std::size_t num_classes_;
  Shape batch_shape_;
  NodeId input_;
  NodeId logits_;
  NodeId target_;
  NodeId loss_;
  NodeId selector_;
  NodeId selected_;
  std::vector<NodeId> params_;
  std::vector<NodeId> layer_nodes_;
};

// Logits for every sample of `batch` ([n, input_shape...]) as [n, C].
Tensor predict_logits(const Model& model, const Tensor& batch);

// argmax with ties broken by the lowest class index.
std::size_t argmax(std::span<const double> row);
std::vector<std::uint32_t> predicted_classes(const Tensor& logits);

// On-disk model: a directory holding `manifest` (JSON) and `weights.bin`
// (little-endian float32, parameters concatenated in declared order).
inline constexpr int kModelFormatVersion = 1;

void save_model(const Model& model, const std::filesystem::path& dir);
Model load_model(const std::filesystem::path& dir);

struct ReferenceModels {
  Model mlp;
  Model cnn;
};

// The frozen tiny-MLP and tiny-CNN fitted to the bundled 8x8 dataset.
ReferenceModels reference_models(const std::filesystem::path& fixture_dir = default_fixture_dir());

}  // namespace compass
