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
#include <string>
#include <vector>

#include "compass/attacks.h"
#include "compass/model.h"
#include "compass/tensor.h"

namespace compass {

// Signed per-feature scores explaining logit `target`. `values` has the
// model's per-sample input shape.
struct AttributionMap {
  Tensor values;
  std::size_t target = 0;
  std::string method;
  std::uint64_t sample_id = 0;
  std::size_t truncated_paths = 0;  // agi: false-class paths that never flipped
};

// Straight-line path from `baseline` to the input, integrated with the
// midpoint rule over `steps` intervals.
struct PathSpec {
  std::optional<Tensor> baseline;  // zeros when empty
  std::size_t steps = 50;
};

struct AgiConfig {
  double epsilon = 0.05;
  std::size_t max_iterations = 20;
  std::size_t false_classes = 20;  // capped at C - 1
  std::uint64_t seed = 0;
};

struct BigConfig {
  AttackConfig attack = default_attack_config(AttackMethod::kPgd);
  std::size_t steps = 50;
  double tolerance = 1e-4;  // L-inf length of the final bracket
  std::size_t max_halvings = 40;
};

// All inputs `x` below have the model's per-sample input shape.
AttributionMap saliency_map(const Model& model, const Tensor& x, std::size_t target);
AttributionMap smoothgrad(const Model& model, const Tensor& x, std::size_t target,
                          std::size_t samples, double sigma, std::uint64_t seed);
AttributionMap integrated_gradients(const Model& model, const Tensor& x, std::size_t target,
                                    const PathSpec& path);

struct BoundarySearch {
  Tensor boundary;  // adversarial side of the final bracket
  bool already_misclassified = false;
};
// PGD towards any class other than `target`, then bisection of the segment
// between x and the adversarial point. Throws NotFoundError when PGD does
// not change the prediction.
BoundarySearch find_boundary(const Model& model, const Tensor& x, std::size_t target,
                             const BigConfig& config);
AttributionMap big(const Model& model, const Tensor& x, std::size_t target,
                   const BigConfig& config);
AttributionMap agi(const Model& model, const Tensor& x, std::size_t target,
                   const AgiConfig& config);

enum class AttributionMethod { kSaliency, kSmoothGrad, kIntegratedGradients, kBig, kAgi };

const char* attribution_name(AttributionMethod method);
// Throws ValidationError for unknown names.
AttributionMethod parse_attribution_method(const std::string& name);

struct AttributionOptions {
  std::size_t sg_samples = 20;
  double sg_sigma = 0.1;
  PathSpec ig;
  BigConfig big;
  AgiConfig agi;
  std::uint64_t seed = 0;
};

AttributionMap attribute(const Model& model, const Tensor& x, std::size_t target,
                         AttributionMethod method, const AttributionOptions& options);

struct CurveResult {
  std::vector<double> fractions;      // 0 .. 1, strictly increasing
  std::vector<double> probabilities;  // softmax probability of the target
  double auc = 0;                     // trapezoid rule
  bool insertion = true;

  std::string to_csv() const;
};

// Pixels are ranked by attribution, highest first, ties to the lowest index.
// For [C,H,W] inputs a pixel is a spatial location scored by the sum over
// channels; otherwise every feature is a pixel. `steps` is clamped to the
// pixel count; the last batch takes the remainder.
std::vector<std::size_t> rank_pixels(const AttributionMap& map);
std::pair<CurveResult, CurveResult> insertion_deletion(const Model& model, const Tensor& x,
                                                       std::size_t target,
                                                       const AttributionMap& map,
                                                       std::size_t steps = 100,
                                                       const std::optional<Tensor>& baseline = {});

// Binary PGM (P5): "P5\n<w> <h>\n255\n" then one byte per pixel, row-major.
// Pixel value = round(255 * a / max a) with a the channel-summed |value|.
std::string heatmap_pgm(const AttributionMap& map);
void render_heatmap(const AttributionMap& map, const std::filesystem::path& path);

}  // namespace compass
