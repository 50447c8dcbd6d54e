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
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compass/tensor.h"

namespace compass {

enum class OpKind {
  kInput,
  kParameter,
  kMatmul,
  kConv2d,
  kAdd,
  kMul,
  kMulScalar,
  kRelu,
  kMaxPool2d,
  kMean,
  kSoftmax,
  kCrossEntropy,
  kClamp,
  kReshape,
};

const char* op_name(OpKind kind);

struct NodeId {
  std::size_t index = 0;
  bool operator==(const NodeId&) const = default;
};

struct Binding {
  NodeId node;
  std::reference_wrapper<const Tensor> value;
};

// Adjoints produced by Graph::backward, indexed by node.
class GradientSet {
 public:
  GradientSet() = default;
  explicit GradientSet(std::vector<std::optional<Tensor>> grads)
      : grads_(std::move(grads)) {}

  bool contains(NodeId node) const;
  // Throws GraphError for nodes that did not take part in the backward pass.
  const Tensor& operator[](NodeId node) const;

 private:
  std::vector<std::optional<Tensor>> grads_;
};

// A tape of tensor operations with reverse-mode differentiation.
//
// Nodes are appended in evaluation order, so operands always precede the
// nodes that consume them. Shapes are inferred when a node is added; input
// nodes declare their shape and must be bound to a tensor of exactly that
// shape on every evaluate(). Forward values are cached for backward().
//
// A Graph is stateful and must not be used from two threads at once.
class Graph {
 public:
  NodeId input(Shape shape, std::string name = {});
  NodeId parameter(Tensor value, std::string name = {});

  // [n,k] x [k,m] -> [n,m]
  NodeId matmul(NodeId a, NodeId b);
  // x [N,C,H,W], weight [O,C,KH,KW], optional bias [O]; stride 1 with
  // symmetric zero padding.
  NodeId conv2d(NodeId x, NodeId weight, std::optional<NodeId> bias,
                std::size_t padding);
  // b may match a's shape, hold a single element, or match a trailing
  // suffix of a's shape (bias broadcast over leading axes).
  NodeId add(NodeId a, NodeId b);
  // Elementwise; either side may hold a single element.
  NodeId mul(NodeId a, NodeId b);
  NodeId mul_scalar(NodeId a, double factor);
  NodeId relu(NodeId a);
  // Window `size`, stride `size`, over the last two axes of [N,C,H,W].
  NodeId max_pool2d(NodeId a, std::size_t size);
  // Mean of all elements, shape {1}.
  NodeId mean(NodeId a);
  // Softmax over the last axis.
  NodeId softmax(NodeId a);
  // probs [n,C], target [n,C] (one-hot or soft) -> [n] with
  // -sum_j target_ij * log(probs_ij). The target receives no gradient.
  NodeId cross_entropy(NodeId probs, NodeId target);
  NodeId clamp(NodeId a, double lo, double hi);
  NodeId reshape(NodeId a, Shape shape);

  std::size_t size() const { return nodes_.size(); }
  OpKind kind(NodeId node) const;
  const Shape& shape(NodeId node) const;
  const std::string& name(NodeId node) const;
  std::span<const NodeId> operands(NodeId node) const;

  void set_parameter(NodeId node, Tensor value);
  const Tensor& parameter_value(NodeId node) const;

  const Tensor& evaluate(NodeId root, std::span<const Binding> bindings);
  const Tensor& evaluate(NodeId root, std::initializer_list<Binding> bindings) {
    return evaluate(root, std::span<const Binding>(bindings.begin(), bindings.size()));
  }

  // Forward value of `node` cached by the most recent evaluate().
  const Tensor& value(NodeId node) const;

  // Adjoints of the most recently evaluated root, which must be a scalar.
  // Every input and parameter node gets an entry (zero when unreachable).
  GradientSet backward() const;

 private:
  struct Node {
    OpKind kind = OpKind::kInput;
    std::vector<NodeId> operands{};
    Shape shape{};
    std::string name{};
    double scalar_a = 0.0;  // mul-scalar factor, clamp lo
    double scalar_b = 0.0;  // clamp hi
    std::size_t param = 0;  // conv padding, pool size
    std::optional<Tensor> value{};
    std::vector<std::size_t> argmax{};  // max-pool2d winners
  };

  NodeId push(Node node);
  const Node& at(NodeId node) const;
  void forward(Node& node);
  void backward_node(const Node& node, const Tensor& grad,
                     std::vector<std::optional<Tensor>>& grads) const;

  std::vector<Node> nodes_;
  std::optional<NodeId> root_;
  std::vector<bool> live_;
};

// Central-difference gradient of a scalar function:
// (f(x + h e_i) - f(x - h e_i)) / (2h) for every coordinate i.
Tensor numeric_gradient(const std::function<double(const Tensor&)>& f,
                        const Tensor& point, double h = 1e-4);

}  // namespace compass
