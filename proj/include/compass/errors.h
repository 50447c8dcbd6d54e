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

#include <stdexcept>
#include <string>

namespace compass {

// Base class of every error the toolkit throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Misuse of a graph: backward before evaluate, non-scalar root, unbound input.
class GraphError : public Error {
 public:
  using Error::Error;
};

// Corrupt or unsupported on-disk artifact (model, dataset, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A search came back empty, e.g. no adversarial example within budget.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Rejected user-supplied parameter. The CLI maps this to exit status 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace compass
