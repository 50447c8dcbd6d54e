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

#include "compass/graph.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "compass/errors.h"

namespace compass {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kConv2d: return "conv2d";
    case OpKind::kAdd: return "add";
    case OpKind::kMul: return "mul";
    case OpKind::kMulScalar: return "mul-scalar";
    case OpKind::kRelu: return "relu";
    case OpKind::kMaxPool2d: return "max-pool2d";
    case OpKind::kMean: return "mean";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kCrossEntropy: return "cross-entropy";
    case OpKind::kClamp: return "clamp";
    case OpKind::kReshape: return "reshape";
  }
  return "?";
}

bool GradientSet::contains(NodeId node) const {
  return node.index < grads_.size() && grads_[node.index].has_value();
}

const Tensor& GradientSet::operator[](NodeId node) const {
  if (!contains(node)) {
    throw GraphError("no gradient recorded for node " +
                     std::to_string(node.index));
  }
  return *grads_[node.index];
}

namespace {

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a) +
                   " vs " + shape_string(b));
}

bool is_suffix(const Shape& suffix, const Shape& full) {
  if (suffix.size() > full.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), full.rbegin());
}

}  // namespace

NodeId Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return NodeId{nodes_.size() - 1};
}

const Graph::Node& Graph::at(NodeId node) const {
  if (node.index >= nodes_.size()) {
    throw GraphError("unknown node " + std::to_string(node.index));
  }
  return nodes_[node.index];
}

OpKind Graph::kind(NodeId node) const { return at(node).kind; }
const Shape& Graph::shape(NodeId node) const { return at(node).shape; }
const std::string& Graph::name(NodeId node) const { return at(node).name; }
std::span<const NodeId> Graph::operands(NodeId node) const { return at(node).operands; }

NodeId Graph::input(Shape shape, std::string name) {
  Tensor probe(shape);  // validates the shape
  Node n{.kind = OpKind::kInput, .shape = std::move(shape), .name = std::move(name)};
  return push(std::move(n));
}

NodeId Graph::parameter(Tensor value, std::string name) {
  Node n{.kind = OpKind::kParameter, .shape = value.shape(), .name = std::move(name)};
  n.value = std::move(value);
  return push(std::move(n));
}

void Graph::set_parameter(NodeId node, Tensor value) {
  Node& n = nodes_.at(node.index);
  if (n.kind != OpKind::kParameter) throw GraphError("node is not a parameter");
  if (value.shape() != n.shape) mismatch("set_parameter", n.shape, value.shape());
  n.value = std::move(value);
}

const Tensor& Graph::parameter_value(NodeId node) const {
  const Node& n = at(node);
  if (n.kind != OpKind::kParameter) throw GraphError("node is not a parameter");
  return *n.value;
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Shape& sa = at(a).shape;
  const Shape& sb = at(b).shape;
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) mismatch("matmul", sa, sb);
  return push({.kind = OpKind::kMatmul, .operands = {a, b}, .shape = {sa[0], sb[1]}});
}

NodeId Graph::conv2d(NodeId x, NodeId weight, std::optional<NodeId> bias,
                     std::size_t padding) {
  const Shape& sx = at(x).shape;
  const Shape& sw = at(weight).shape;
  if (sx.size() != 4 || sw.size() != 4 || sx[1] != sw[1]) mismatch("conv2d", sx, sw);
  if (sx[2] + 2 * padding < sw[2] || sx[3] + 2 * padding < sw[3]) {
    mismatch("conv2d (kernel larger than padded input)", sx, sw);
  }
  std::vector<NodeId> operands{x, weight};
  if (bias) {
    const Shape& sb = at(*bias).shape;
    if (sb != Shape{sw[0]}) mismatch("conv2d bias", sb, Shape{sw[0]});
    operands.push_back(*bias);
  }
  Shape out{sx[0], sw[0], sx[2] + 2 * padding - sw[2] + 1,
            sx[3] + 2 * padding - sw[3] + 1};
  return push({.kind = OpKind::kConv2d,
               .operands = std::move(operands),
               .shape = std::move(out),
               .param = padding});
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Shape& sa = at(a).shape;
  const Shape& sb = at(b).shape;
  if (sa != sb && shape_size(sb) != 1 && !is_suffix(sb, sa)) mismatch("add", sa, sb);
  return push({.kind = OpKind::kAdd, .operands = {a, b}, .shape = sa});
}

NodeId Graph::mul(NodeId a, NodeId b) {
  const Shape& sa = at(a).shape;
  const Shape& sb = at(b).shape;
  Shape out;
  if (sa == sb || shape_size(sb) == 1) {
    out = sa;
  } else if (shape_size(sa) == 1) {
    out = sb;
  } else {
    mismatch("mul", sa, sb);
  }
  return push({.kind = OpKind::kMul, .operands = {a, b}, .shape = std::move(out)});
}

NodeId Graph::mul_scalar(NodeId a, double factor) {
  if (!std::isfinite(factor)) throw NonFiniteError("mul-scalar: non-finite factor");
  return push({.kind = OpKind::kMulScalar, .operands = {a}, .shape = at(a).shape,
               .scalar_a = factor});
}

NodeId Graph::relu(NodeId a) {
  return push({.kind = OpKind::kRelu, .operands = {a}, .shape = at(a).shape});
}

NodeId Graph::max_pool2d(NodeId a, std::size_t size) {
  const Shape& sa = at(a).shape;
  if (size == 0) throw ShapeError("max-pool2d: window size must be positive");
  if (sa.size() != 4 || sa[2] < size || sa[3] < size) {
    mismatch("max-pool2d", sa, Shape{size, size});
  }
  return push({.kind = OpKind::kMaxPool2d,
               .operands = {a},
               .shape = {sa[0], sa[1], sa[2] / size, sa[3] / size},
               .param = size});
}

NodeId Graph::mean(NodeId a) {
  return push({.kind = OpKind::kMean, .operands = {a}, .shape = {1}});
}

NodeId Graph::softmax(NodeId a) {
  return push({.kind = OpKind::kSoftmax, .operands = {a}, .shape = at(a).shape});
}

NodeId Graph::cross_entropy(NodeId probs, NodeId target) {
  const Shape& sp = at(probs).shape;
  const Shape& st = at(target).shape;
  if (sp.size() != 2 || sp != st) mismatch("cross-entropy", sp, st);
  return push({.kind = OpKind::kCrossEntropy, .operands = {probs, target},
               .shape = {sp[0]}});
}

NodeId Graph::clamp(NodeId a, double lo, double hi) {
  if (!(lo <= hi)) throw ShapeError("clamp: lo must not exceed hi");
  return push({.kind = OpKind::kClamp, .operands = {a}, .shape = at(a).shape,
               .scalar_a = lo, .scalar_b = hi});
}

NodeId Graph::reshape(NodeId a, Shape shape) {
  const Shape& sa = at(a).shape;
  if (shape_size(sa) != shape_size(shape)) mismatch("reshape", sa, shape);
  return push({.kind = OpKind::kReshape, .operands = {a}, .shape = std::move(shape)});
}

const Tensor& Graph::value(NodeId node) const {
  const Node& n = at(node);
  if (!n.value) {
    throw GraphError("node " + std::to_string(node.index) + " (" +
                     op_name(n.kind) + ") has no forward value");
  }
  return *n.value;
}

const Tensor& Graph::evaluate(NodeId root, std::span<const Binding> bindings) {
  at(root);
  // Reachability from the root; operands always have smaller indices.
  live_.assign(nodes_.size(), false);
  live_[root.index] = true;
  for (std::size_t i = root.index + 1; i-- > 0;) {
    if (!live_[i]) continue;
    for (NodeId op : nodes_[i].operands) live_[op.index] = true;
  }
  for (Node& n : nodes_) {
    if (n.kind == OpKind::kInput) n.value.reset();
  }
  for (const Binding& b : bindings) {
    Node& n = nodes_.at(b.node.index);
    if (n.kind != OpKind::kInput) throw GraphError("binding targets a non-input node");
    const Tensor& t = b.value.get();
    if (t.shape() != n.shape) mismatch("input binding", n.shape, t.shape());
    n.value = t;
  }
  root_.reset();
  for (std::size_t i = 0; i <= root.index; ++i) {
    if (!live_[i]) continue;
    Node& n = nodes_[i];
    if (n.kind == OpKind::kInput) {
      if (!n.value) {
        throw GraphError("input node " + std::to_string(i) +
                         (n.name.empty() ? "" : " '" + n.name + "'") + " is not bound");
      }
      continue;
    }
    if (n.kind == OpKind::kParameter) continue;
    forward(n);
    check_finite(n.value->data(), std::string(op_name(n.kind)) + " output (node " +
                                      std::to_string(i) + ")");
  }
  root_ = root;
  return *nodes_[root.index].value;
}

void Graph::forward(Node& n) {
  auto val = [&](std::size_t k) -> const Tensor& { return *nodes_[n.operands[k].index].value; };
  std::vector<double> out(shape_size(n.shape), 0.0);
  switch (n.kind) {
    case OpKind::kInput:
    case OpKind::kParameter:
      return;
    case OpKind::kMatmul: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      const std::size_t rows = a.dim(0), inner = a.dim(1), cols = b.dim(1);
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t p = 0; p < inner; ++p) {
          const double av = a[i * inner + p];
          for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] += av * b[p * cols + j];
        }
      }
      break;
    }
    case OpKind::kConv2d: {
      const Tensor& x = val(0);
      const Tensor& w = val(1);
      const std::size_t batch = x.dim(0), chans = x.dim(1), h = x.dim(2), wd = x.dim(3);
      const std::size_t outc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
      const std::size_t oh = n.shape[2], ow = n.shape[3];
      const long pad = static_cast<long>(n.param);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < outc; ++o) {
          double* dst = &out[((b * outc + o) * oh) * ow];
          for (std::size_t c = 0; c < chans; ++c) {
            const double* src = &x.data()[((b * chans + c) * h) * wd];
            for (std::size_t ki = 0; ki < kh; ++ki) {
              for (std::size_t kj = 0; kj < kw; ++kj) {
                const double wv = w[((o * chans + c) * kh + ki) * kw + kj];
                for (std::size_t i = 0; i < oh; ++i) {
                  const long si = static_cast<long>(i + ki) - pad;
                  if (si < 0 || si >= static_cast<long>(h)) continue;
                  for (std::size_t j = 0; j < ow; ++j) {
                    const long sj = static_cast<long>(j + kj) - pad;
                    if (sj < 0 || sj >= static_cast<long>(wd)) continue;
                    dst[i * ow + j] += wv * src[si * wd + sj];
                  }
                }
              }
            }
          }
          if (n.operands.size() == 3) {
            const double bv = val(2)[o];
            for (std::size_t k = 0; k < oh * ow; ++k) dst[k] += bv;
          }
        }
      }
      break;
    }
    case OpKind::kAdd: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      const std::size_t period = b.size();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i % period];
      break;
    }
    case OpKind::kMul: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a[a.size() == 1 ? 0 : i] * b[b.size() == 1 ? 0 : i];
      }
      break;
    }
    case OpKind::kMulScalar: {
      const Tensor& a = val(0);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = n.scalar_a * a[i];
      break;
    }
    case OpKind::kRelu: {
      const Tensor& a = val(0);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
      break;
    }
    case OpKind::kMaxPool2d: {
      const Tensor& a = val(0);
      const std::size_t planes = n.shape[0] * n.shape[1];
      const std::size_t h = a.dim(2), w = a.dim(3), s = n.param;
      const std::size_t oh = n.shape[2], ow = n.shape[3];
      n.argmax.assign(out.size(), 0);
      for (std::size_t p = 0; p < planes; ++p) {
        for (std::size_t i = 0; i < oh; ++i) {
          for (std::size_t j = 0; j < ow; ++j) {
            std::size_t best = p * h * w + (i * s) * w + j * s;
            for (std::size_t di = 0; di < s; ++di) {
              for (std::size_t dj = 0; dj < s; ++dj) {
                const std::size_t idx = p * h * w + (i * s + di) * w + (j * s + dj);
                if (a[idx] > a[best]) best = idx;  // first maximum wins ties
              }
            }
            const std::size_t o = (p * oh + i) * ow + j;
            out[o] = a[best];
            n.argmax[o] = best;
          }
        }
      }
      break;
    }
    case OpKind::kMean: {
      const Tensor& a = val(0);
      double sum = 0.0;
      for (double v : a.data()) sum += v;
      out[0] = sum / static_cast<double>(a.size());
      break;
    }
    case OpKind::kSoftmax: {
      const Tensor& a = val(0);
      const std::size_t width = n.shape.back();
      for (std::size_t r = 0; r < out.size() / width; ++r) {
        const double* row = &a.data()[r * width];
        const double peak = *std::max_element(row, row + width);
        double total = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
          out[r * width + j] = std::exp(row[j] - peak);
          total += out[r * width + j];
        }
        for (std::size_t j = 0; j < width; ++j) out[r * width + j] /= total;
      }
      break;
    }
    case OpKind::kCrossEntropy: {
      const Tensor& p = val(0);
      const Tensor& t = val(1);
      const std::size_t width = p.dim(1);
      for (std::size_t r = 0; r < n.shape[0]; ++r) {
        double loss = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
          const double tv = t[r * width + j];
          if (tv != 0.0) loss -= tv * std::log(p[r * width + j]);
        }
        out[r] = loss;
      }
      break;
    }
    case OpKind::kClamp: {
      const Tensor& a = val(0);
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp(a[i], n.scalar_a, n.scalar_b);
      }
      break;
    }
    case OpKind::kReshape: {
      const Tensor& a = val(0);
      std::copy(a.data().begin(), a.data().end(), out.begin());
      break;
    }
  }
  check_finite(out, std::string(op_name(n.kind)) + " output");
  n.value = Tensor(n.shape, std::move(out));
}

GradientSet Graph::backward() const {
  if (!root_) throw GraphError("backward() called before evaluate()");
  const Node& root = nodes_[root_->index];
  if (shape_size(root.shape) != 1) {
    throw GraphError("backward() needs a scalar root, got shape " +
                     shape_string(root.shape));
  }
  std::vector<std::optional<Tensor>> grads(nodes_.size());
  grads[root_->index] = Tensor(root.shape, 1.0);
  for (std::size_t i = root_->index + 1; i-- > 0;) {
    if (!live_[i] || !grads[i]) continue;
    const Node& n = nodes_[i];
    if (n.kind == OpKind::kInput || n.kind == OpKind::kParameter) continue;
    backward_node(n, *grads[i], grads);
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if ((n.kind == OpKind::kInput || n.kind == OpKind::kParameter) && !grads[i]) {
      grads[i] = Tensor(n.shape, 0.0);
    }
  }
  return GradientSet(std::move(grads));
}

void Graph::backward_node(const Node& n, const Tensor& g,
                          std::vector<std::optional<Tensor>>& grads) const {
  auto val = [&](std::size_t k) -> const Tensor& { return *nodes_[n.operands[k].index].value; };
  // Accumulates into the adjoint of operand k; `fn(dst)` adds its share.
  auto accumulate = [&](std::size_t k, auto&& fn) {
    const NodeId op = n.operands[k];
    auto& slot = grads[op.index];
    std::vector<double> buf(shape_size(nodes_[op.index].shape), 0.0);
    fn(buf);
    check_finite(buf, std::string("gradient through ") + op_name(n.kind));
    if (!slot) {
      slot = Tensor(nodes_[op.index].shape, std::move(buf));
    } else {
      for (std::size_t i = 0; i < buf.size(); ++i) (*slot)[i] += buf[i];
    }
  };

  switch (n.kind) {
    case OpKind::kInput:
    case OpKind::kParameter:
      return;
    case OpKind::kMatmul: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      const std::size_t rows = a.dim(0), inner = a.dim(1), cols = b.dim(1);
      accumulate(0, [&](std::vector<double>& da) {
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t p = 0; p < inner; ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols; ++j) s += g[i * cols + j] * b[p * cols + j];
            da[i * inner + p] = s;
          }
      });
      accumulate(1, [&](std::vector<double>& db) {
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t p = 0; p < inner; ++p) {
            const double av = a[i * inner + p];
            for (std::size_t j = 0; j < cols; ++j) db[p * cols + j] += av * g[i * cols + j];
          }
      });
      return;
    }
    case OpKind::kConv2d: {
      const Tensor& x = val(0);
      const Tensor& w = val(1);
      const std::size_t batch = x.dim(0), chans = x.dim(1), h = x.dim(2), wd = x.dim(3);
      const std::size_t outc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
      const std::size_t oh = n.shape[2], ow = n.shape[3];
      const long pad = static_cast<long>(n.param);
      // Visits every (output, input, weight) triple that contributed.
      auto for_each_tap = [&](auto&& fn) {
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t o = 0; o < outc; ++o)
            for (std::size_t c = 0; c < chans; ++c)
              for (std::size_t ki = 0; ki < kh; ++ki)
                for (std::size_t kj = 0; kj < kw; ++kj) {
                  const std::size_t widx = ((o * chans + c) * kh + ki) * kw + kj;
                  for (std::size_t i = 0; i < oh; ++i) {
                    const long si = static_cast<long>(i + ki) - pad;
                    if (si < 0 || si >= static_cast<long>(h)) continue;
                    for (std::size_t j = 0; j < ow; ++j) {
                      const long sj = static_cast<long>(j + kj) - pad;
                      if (sj < 0 || sj >= static_cast<long>(wd)) continue;
                      const std::size_t xidx = ((b * chans + c) * h + si) * wd + sj;
                      const std::size_t oidx = ((b * outc + o) * oh + i) * ow + j;
                      fn(oidx, xidx, widx);
                    }
                  }
                }
      };
      accumulate(0, [&](std::vector<double>& dx) {
        for_each_tap([&](std::size_t o, std::size_t xi, std::size_t wi) { dx[xi] += g[o] * w[wi]; });
      });
      accumulate(1, [&](std::vector<double>& dw) {
        for_each_tap([&](std::size_t o, std::size_t xi, std::size_t wi) { dw[wi] += g[o] * x[xi]; });
      });
      if (n.operands.size() == 3) {
        accumulate(2, [&](std::vector<double>& db) {
          for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t o = 0; o < outc; ++o)
              for (std::size_t k = 0; k < oh * ow; ++k) db[o] += g[((b * outc + o) * oh * ow) + k];
        });
      }
      return;
    }
    case OpKind::kAdd: {
      accumulate(0, [&](std::vector<double>& da) {
        std::copy(g.data().begin(), g.data().end(), da.begin());
      });
      accumulate(1, [&](std::vector<double>& db) {
        const std::size_t period = db.size();
        for (std::size_t i = 0; i < g.size(); ++i) db[i % period] += g[i];
      });
      return;
    }
    case OpKind::kMul: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      accumulate(0, [&](std::vector<double>& da) {
        for (std::size_t i = 0; i < g.size(); ++i)
          da[a.size() == 1 ? 0 : i] += g[i] * b[b.size() == 1 ? 0 : i];
      });
      accumulate(1, [&](std::vector<double>& db) {
        for (std::size_t i = 0; i < g.size(); ++i)
          db[b.size() == 1 ? 0 : i] += g[i] * a[a.size() == 1 ? 0 : i];
      });
      return;
    }
    case OpKind::kMulScalar: {
      accumulate(0, [&](std::vector<double>& da) {
        for (std::size_t i = 0; i < g.size(); ++i) da[i] = n.scalar_a * g[i];
      });
      return;
    }
    case OpKind::kRelu: {
      const Tensor& a = val(0);
      // Subgradient at exactly 0 is 0.
      accumulate(0, [&](std::vector<double>& da) {
        for (std::size_t i = 0; i < g.size(); ++i) da[i] = a[i] > 0.0 ? g[i] : 0.0;
      });
      return;
    }
    case OpKind::kMaxPool2d: {
      accumulate(0, [&](std::vector<double>& da) {
        for (std::size_t o = 0; o < g.size(); ++o) da[n.argmax[o]] += g[o];
      });
      return;
    }
    case OpKind::kMean: {
      const double share = g[0] / static_cast<double>(val(0).size());
      accumulate(0, [&](std::vector<double>& da) { std::fill(da.begin(), da.end(), share); });
      return;
    }
    case OpKind::kSoftmax: {
      const Tensor& y = *n.value;
      const std::size_t width = n.shape.back();
      accumulate(0, [&](std::vector<double>& da) {
        for (std::size_t r = 0; r < y.size() / width; ++r) {
          double dot = 0.0;
          for (std::size_t j = 0; j < width; ++j) dot += g[r * width + j] * y[r * width + j];
          for (std::size_t j = 0; j < width; ++j) {
            da[r * width + j] = y[r * width + j] * (g[r * width + j] - dot);
          }
        }
      });
      return;
    }
    case OpKind::kCrossEntropy: {
      const Tensor& p = val(0);
      const Tensor& t = val(1);
      const std::size_t width = p.dim(1);
      accumulate(0, [&](std::vector<double>& dp) {
        for (std::size_t r = 0; r < n.shape[0]; ++r)
          for (std::size_t j = 0; j < width; ++j) {
            const double tv = t[r * width + j];
            if (tv != 0.0) dp[r * width + j] = -g[r] * tv / p[r * width + j];
          }
      });
      return;
    }
    case OpKind::kClamp: {
      const Tensor& a = val(0);
      accumulate(0, [&](std::vector<double>& da) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] = (a[i] >= n.scalar_a && a[i] <= n.scalar_b) ? g[i] : 0.0;
        }
      });
      return;
    }
    case OpKind::kReshape: {
      accumulate(0, [&](std::vector<double>& da) {
        std::copy(g.data().begin(), g.data().end(), da.begin());
      });
      return;
    }
  }
}

Tensor numeric_gradient(const std::function<double(const Tensor&)>& f,
                        const Tensor& point, double h) {
  if (!(h > 0.0)) throw ShapeError("numeric_gradient: step must be positive");
  Tensor grad(point.shape(), 0.0);
  Tensor probe = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + h;
    const double up = f(probe);
    probe[i] = point[i] - h;
    const double down = f(probe);
    probe[i] = point[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NonFiniteError("numeric_gradient: non-finite function value at coordinate " +
                           std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace compass
