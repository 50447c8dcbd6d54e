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

#include "compass/model.h"

#include <algorithm>

#include "compass/errors.h"

namespace compass {

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool2d: return "max-pool2d";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kSoftmax: return "softmax";
  }
  return "?";
}

LayerKind parse_layer_kind(const std::string& name) {
  for (LayerKind k : {LayerKind::kDense, LayerKind::kConv2d, LayerKind::kRelu,
                      LayerKind::kMaxPool2d, LayerKind::kFlatten, LayerKind::kSoftmax}) {
    if (name == layer_kind_name(k)) return k;
  }
  throw FormatError("unknown layer kind '" + name + "'");
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) {
  return {.kind = LayerKind::kDense, .in = in, .out = out};
}

LayerSpec LayerSpec::conv2d(std::size_t in_channels, std::size_t out_channels,
                            std::size_t kernel, std::size_t padding) {
  return {.kind = LayerKind::kConv2d,
          .in = in_channels,
          .out = out_channels,
          .kernel_h = kernel,
          .kernel_w = kernel,
          .padding = padding};
}

Model::Model(std::string name, Shape input_shape, std::size_t num_classes,
             std::vector<LayerSpec> layers, std::vector<Tensor> params)
    : name_(std::move(name)),
      input_shape_(std::move(input_shape)),
      num_classes_(num_classes),
      layers_(std::move(layers)),
      params_(std::move(params)) {
  validate();
}

std::size_t Model::param_count() const {
  std::size_t n = 0;
  for (const Tensor& p : params_) n += p.size();
  return n;
}

std::optional<std::size_t> Model::weight_index(std::size_t layer) const {
  std::size_t index = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!layers_[i].has_params()) continue;
    if (i == layer) return index;
    index += 2;
  }
  return std::nullopt;
}

std::vector<Shape> Model::layer_shapes() const {
  std::vector<Shape> shapes;
  Shape cur = input_shape_;
  auto fail = [&](std::size_t i, const std::string& why) {
    throw ShapeError("layer " + std::to_string(i) + " (" +
                     layer_kind_name(layers_[i].kind) + "): " + why + ", input " +
                     shape_string(cur));
  };
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    switch (l.kind) {
      case LayerKind::kDense:
        if (cur.size() != 1 || cur[0] != l.in || l.out == 0) fail(i, "expects [" + std::to_string(l.in) + "]");
        cur = {l.out};
        break;
      case LayerKind::kConv2d: {
        if (cur.size() != 3 || cur[0] != l.in || l.out == 0 || l.kernel_h == 0 ||
            l.kernel_w == 0) {
          fail(i, "expects [" + std::to_string(l.in) + "xHxW]");
        }
        if (cur[1] + 2 * l.padding < l.kernel_h || cur[2] + 2 * l.padding < l.kernel_w) {
          fail(i, "kernel larger than padded input");
        }
        cur = {l.out, cur[1] + 2 * l.padding - l.kernel_h + 1,
               cur[2] + 2 * l.padding - l.kernel_w + 1};
        break;
      }
      case LayerKind::kMaxPool2d:
        if (cur.size() != 3 || l.pool == 0 || cur[1] < l.pool || cur[2] < l.pool) {
          fail(i, "expects [CxHxW] at least as large as the window");
        }
        cur = {cur[0], cur[1] / l.pool, cur[2] / l.pool};
        break;
      case LayerKind::kFlatten:
        cur = {shape_size(cur)};
        break;
      case LayerKind::kSoftmax:
        if (cur.size() != 1) fail(i, "softmax expects a vector");
        break;
      case LayerKind::kRelu:
        break;
    }
    shapes.push_back(cur);
  }
  return shapes;
}

void Model::validate() const {
  if (num_classes_ < 2) throw ShapeError("model needs at least 2 classes");
  if (layers_.empty()) throw ShapeError("model has no layers");
  if (input_shape_.empty() || shape_size(input_shape_) == 0) {
    throw ShapeError("model input shape " + shape_string(input_shape_) + " is empty");
  }
  const std::vector<Shape> shapes = layer_shapes();
  if (shapes.back() != Shape{num_classes_}) {
    throw ShapeError("final layer emits " + shape_string(shapes.back()) +
                     ", expected " + std::to_string(num_classes_) + " logits");
  }
  if (layers_.back().kind == LayerKind::kSoftmax) {
    throw ShapeError("models emit raw logits; a trailing softmax layer is not allowed");
  }
  std::size_t expected = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    if (!l.has_params()) continue;
    Shape w = l.kind == LayerKind::kDense ? Shape{l.in, l.out}
                                          : Shape{l.out, l.in, l.kernel_h, l.kernel_w};
    Shape b{l.out};
    if (expected + 2 > params_.size()) {
      throw ShapeError("missing parameters for layer " + std::to_string(i));
    }
    if (params_[expected].shape() != w) {
      throw ShapeError("layer " + std::to_string(i) + " weight " +
                       shape_string(params_[expected].shape()) + " vs " + shape_string(w));
    }
    if (params_[expected + 1].shape() != b) {
      throw ShapeError("layer " + std::to_string(i) + " bias " +
                       shape_string(params_[expected + 1].shape()) + " vs " + shape_string(b));
    }
    expected += 2;
  }
  if (expected != params_.size()) {
    throw ShapeError("model has " + std::to_string(params_.size()) +
                     " parameter tensors, layers declare " + std::to_string(expected));
  }
}

Model Model::with_params(std::vector<Tensor> params) const {
  return Model(name_, input_shape_, num_classes_, layers_, std::move(params));
}

Model Model::renamed(std::string name) const {
  Model copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

Network::Network(const Model& model, std::size_t batch)
    : batch_(batch), num_classes_(model.num_classes()) {
  if (batch == 0) throw ShapeError("network batch size must be positive");
  batch_shape_ = {batch};
  batch_shape_.insert(batch_shape_.end(), model.input_shape().begin(), model.input_shape().end());
  input_ = graph_.input(batch_shape_, "input");
  NodeId cur = input_;
  // Graph shapes carry the batch axis; conv and pool need [N,C,H,W].
  std::size_t p = 0;
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    const LayerSpec& l = model.layers()[i];
    switch (l.kind) {
      case LayerKind::kDense: {
        NodeId w = graph_.parameter(model.params()[p], "w" + std::to_string(i));
        NodeId b = graph_.parameter(model.params()[p + 1], "b" + std::to_string(i));
        params_.push_back(w);
        params_.push_back(b);
        p += 2;
        cur = graph_.add(graph_.matmul(cur, w), b);
        break;
      }
      case LayerKind::kConv2d: {
        NodeId w = graph_.parameter(model.params()[p], "w" + std::to_string(i));
        NodeId b = graph_.parameter(model.params()[p + 1], "b" + std::to_string(i));
        params_.push_back(w);
        params_.push_back(b);
        p += 2;
        cur = graph_.conv2d(cur, w, b, l.padding);
        break;
      }
      case LayerKind::kRelu:
        cur = graph_.relu(cur);
        break;
      case LayerKind::kMaxPool2d:
        cur = graph_.max_pool2d(cur, l.pool);
        break;
      case LayerKind::kFlatten:
        cur = graph_.reshape(cur, {batch, shape_size(graph_.shape(cur)) / batch});
        break;
      case LayerKind::kSoftmax:
        cur = graph_.softmax(cur);
        break;
    }
    layer_nodes_.push_back(cur);
  }
  logits_ = cur;
  target_ = graph_.input({batch, num_classes_}, "target");
  loss_ = graph_.mean(graph_.cross_entropy(graph_.softmax(logits_), target_));
  selector_ = graph_.input({num_classes_, 1}, "selector");
  selected_ = graph_.matmul(logits_, selector_);
}

Tensor Network::one_hot(std::span<const std::uint32_t> labels) const {
  if (labels.size() != batch_) {
    throw ShapeError("expected " + std::to_string(batch_) + " labels, got " +
                     std::to_string(labels.size()));
  }
  Tensor t({batch_, num_classes_}, 0.0);
  for (std::size_t i = 0; i < batch_; ++i) {
    if (labels[i] >= num_classes_) throw ShapeError("label out of range");
    t[i * num_classes_ + labels[i]] = 1.0;
  }
  return t;
}

const Tensor& Network::logits(const Tensor& inputs) {
  return graph_.evaluate(logits_, {{input_, inputs}});
}

double Network::loss(const Tensor& inputs, std::span<const std::uint32_t> labels) {
  const Tensor target = one_hot(labels);
  return graph_.evaluate(loss_, {{input_, inputs}, {target_, target}}).item();
}

double Network::loss_gradient(const Tensor& inputs, std::span<const std::uint32_t> labels,
                              Tensor* input_grad, std::vector<Tensor>* param_grads) {
  const double value = loss(inputs, labels);
  const GradientSet grads = graph_.backward();
  if (input_grad) *input_grad = grads[input_];
  if (param_grads) {
    param_grads->clear();
    for (NodeId id : params_) param_grads->push_back(grads[id]);
  }
  return value;
}

Tensor Network::logit_gradient(const Tensor& input, std::size_t cls,
                               std::vector<Tensor>* param_grads) {
  if (batch_ != 1) throw ShapeError("logit_gradient needs a batch of one");
  if (cls >= num_classes_) throw ShapeError("class index out of range");
  Tensor selector({num_classes_, 1}, 0.0);
  selector[cls] = 1.0;
  graph_.evaluate(selected_, {{input_, input}, {selector_, selector}});
  const GradientSet grads = graph_.backward();
  if (param_grads) {
    param_grads->clear();
    for (NodeId id : params_) param_grads->push_back(grads[id]);
  }
  return grads[input_];
}

void Network::set_param(std::size_t index, Tensor value) {
  graph_.set_parameter(params_.at(index), std::move(value));
}

const Tensor& Network::param(std::size_t index) const {
  return graph_.parameter_value(params_.at(index));
}

const Tensor& Network::layer_output(std::size_t layer) const {
  return graph_.value(layer_nodes_.at(layer));
}

Tensor predict_logits(const Model& model, const Tensor& batch) {
  if (batch.rank() != model.input_shape().size() + 1 ||
      !std::equal(model.input_shape().begin(), model.input_shape().end(),
                  batch.shape().begin() + 1)) {
    Shape expected{0};
    expected.insert(expected.end(), model.input_shape().begin(), model.input_shape().end());
    throw ShapeError("predict_logits: batch " + shape_string(batch.shape()) +
                     " does not match model input [n" +
                     shape_string(model.input_shape()).substr(1));
  }
  const std::size_t n = batch.dim(0);
  const std::size_t c = model.num_classes();
  std::vector<double> out;
  out.reserve(n * c);
  constexpr std::size_t kChunk = 256;
  const std::size_t stride = shape_size(model.input_shape());
  std::optional<Network> full;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t len = std::min(kChunk, n - start);
    Shape shape = batch.shape();
    shape[0] = len;
    std::vector<double> chunk(batch.data().begin() + start * stride,
                              batch.data().begin() + (start + len) * stride);
    Tensor inputs(std::move(shape), std::move(chunk));
    if (len == kChunk) {
      if (!full) full.emplace(model, kChunk);
      const Tensor& z = full->logits(inputs);
      out.insert(out.end(), z.data().begin(), z.data().end());
    } else {
      Network net(model, len);
      const Tensor& z = net.logits(inputs);
      out.insert(out.end(), z.data().begin(), z.data().end());
    }
  }
  return Tensor({n, c}, std::move(out));
}

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

std::vector<std::uint32_t> predicted_classes(const Tensor& logits) {
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  std::vector<std::uint32_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::uint32_t>(argmax(logits.data().subspan(i * c, c)));
  }
  return out;
}

}  // namespace compass
