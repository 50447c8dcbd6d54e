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

#include "compass/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "compass/errors.h"

namespace compass {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace {

// Only the leading (batch) axis may be empty.
void check_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one axis");
  for (std::size_t i = 1; i < shape.size(); ++i) {
    if (shape[i] == 0) {
      throw ShapeError("tensor shape " + shape_string(shape) +
                       " has an empty inner axis");
    }
  }
}

}  // namespace

void check_finite(std::span<const double> values, const std::string& what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << "non-finite value " << values[i] << " at index " << i << " in "
          << what;
      throw NonFiniteError(msg.str());
    }
  }
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  check_shape(shape_);
  if (!std::isfinite(fill)) throw NonFiniteError("non-finite tensor fill value");
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("tensor of shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_size(shape_)) + " elements, got " +
                     std::to_string(data_.size()));
  }
  check_finite(data_, "tensor " + shape_string(shape_));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_string(shape_));
  }
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " +
                     shape_string(shape));
  }
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  check_shape(out.shape_);
  return out;
}

Tensor Tensor::slice_leading(std::size_t index) const {
  if (rank() < 1 || index >= shape_[0]) {
    throw ShapeError("row " + std::to_string(index) + " out of range for " +
                     shape_string(shape_));
  }
  Shape row_shape = shape_;
  row_shape[0] = 1;
  const std::size_t stride = shape_size(row_shape);
  Tensor out;
  out.shape_ = std::move(row_shape);
  out.data_.assign(data_.begin() + index * stride,
                   data_.begin() + (index + 1) * stride);
  return out;
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw ShapeError("stack_rows needs at least one row");
  Shape inner = rows.front().shape();
  if (inner.size() > 1 && inner[0] == 1) inner.erase(inner.begin());
  const std::size_t stride = shape_size(inner);
  std::vector<double> data;
  data.reserve(stride * rows.size());
  for (const Tensor& row : rows) {
    if (row.size() != stride) {
      throw ShapeError("stack_rows: row shape " + shape_string(row.shape()) +
                       " differs from " + shape_string(inner));
    }
    data.insert(data.end(), row.data().begin(), row.data().end());
  }
  Shape shape{rows.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  return Tensor(std::move(shape), std::move(data));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) {
    throw ShapeError("max_abs_diff: " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

}  // namespace compass
