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

#include "compass/attribution.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "compass/binary_io.h"
#include "compass/errors.h"
#include "compass/random.h"

namespace compass {
namespace {

enum Stream : std::uint32_t { kSmoothNoise = 40, kAgiClassKey };

Shape batched(const Shape& sample) {
  Shape s{1};
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

void check_input(const Model& model, const Tensor& x, std::size_t target) {
  if (x.shape() != model.input_shape()) {
    throw ShapeError("attribution input " + shape_string(x.shape()) + " does not match model input " +
                     shape_string(model.input_shape()));
  }
  if (target >= model.num_classes()) throw ValidationError("target class out of range");
}

// Logit-gradient helper over one network of batch size one.
class LogitGradient {
 public:
  explicit LogitGradient(const Model& model)
      : net_(model, 1), shape_(batched(model.input_shape())), sample_(model.input_shape()) {}

  std::vector<double> operator()(std::span<const double> x, std::size_t cls) {
    return net_.logit_gradient(Tensor(shape_, std::vector<double>(x.begin(), x.end())), cls).values();
  }
  std::vector<double> logits(std::span<const double> x) {
    return net_.logits(Tensor(shape_, std::vector<double>(x.begin(), x.end()))).values();
  }
  const Shape& sample_shape() const { return sample_; }

 private:
  Network net_;
  Shape shape_;
  Shape sample_;
};

AttributionMap make_map(const Shape& shape, std::vector<double> values, std::size_t target,
                        const char* method) {
  AttributionMap m;
  m.values = Tensor(shape, std::move(values));
  m.target = target;
  m.method = method;
  return m;
}

std::vector<double> path_integral(LogitGradient& grad, std::span<const double> x,
                                  std::span<const double> base, std::size_t target,
                                  std::size_t steps) {
  if (steps < 1) throw ValidationError("integration needs at least one step");
  const std::size_t n = x.size();
  std::vector<double> mean(n, 0.0), point(n);
  for (std::size_t k = 0; k < steps; ++k) {
    const double a = (static_cast<double>(k) + 0.5) / static_cast<double>(steps);
    for (std::size_t j = 0; j < n; ++j) point[j] = base[j] + a * (x[j] - base[j]);
    const std::vector<double> g = grad(point, target);
    const double w = 1.0 / static_cast<double>(k + 1);
    for (std::size_t j = 0; j < n; ++j) mean[j] += (g[j] - mean[j]) * w;
  }
  for (std::size_t j = 0; j < n; ++j) mean[j] *= x[j] - base[j];
  return mean;
}

std::size_t predicted(LogitGradient& grad, std::span<const double> x) {
  return argmax(grad.logits(x));
}

}  // namespace

AttributionMap saliency_map(const Model& model, const Tensor& x, std::size_t target) {
  check_input(model, x, target);
  LogitGradient grad(model);
  return make_map(x.shape(), grad(x.data(), target), target, "sm");
}

AttributionMap smoothgrad(const Model& model, const Tensor& x, std::size_t target,
                          std::size_t samples, double sigma, std::uint64_t seed) {
  check_input(model, x, target);
  if (samples < 1) throw ValidationError("smoothgrad needs at least one sample");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("smoothgrad sigma must be >= 0");
  LogitGradient grad(model);
  const CounterRng rng(seed);
  const std::size_t n = x.size();
  std::vector<double> mean(n, 0.0), point(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      point[j] = x[j] + sigma * rng.normal(s, kSmoothNoise, static_cast<std::uint32_t>(j));
    }
    const std::vector<double> g = grad(point, target);
    const double w = 1.0 / static_cast<double>(s + 1);
    for (std::size_t j = 0; j < n; ++j) mean[j] += (g[j] - mean[j]) * w;
  }
  return make_map(x.shape(), std::move(mean), target, "sg");
}

AttributionMap integrated_gradients(const Model& model, const Tensor& x, std::size_t target,
                                    const PathSpec& path) {
  check_input(model, x, target);
  const Tensor base = path.baseline.value_or(Tensor(x.shape(), 0.0));
  if (base.shape() != x.shape()) throw ShapeError("baseline shape differs from input");
  for (double v : base.data()) {
    if (v < 0.0 || v > 1.0) throw ValidationError("baseline values must lie in [0,1]");
  }
  LogitGradient grad(model);
  return make_map(x.shape(), path_integral(grad, x.data(), base.data(), target, path.steps), target,
                  "ig");
}

BoundarySearch find_boundary(const Model& model, const Tensor& x, std::size_t target,
                             const BigConfig& config) {
  check_input(model, x, target);
  LogitGradient grad(model);
  if (predicted(grad, x.data()) != target) return {x, true};

  AttackConfig attack = config.attack;
  attack.method = AttackMethod::kPgd;
  const LabeledDataset one(x.reshaped(batched(x.shape())), {static_cast<std::uint32_t>(target)},
                           model.num_classes());
  const AdversarialBatch adv = pgd(model, one, attack);
  const std::span<const double> far = adv.adversarial.data();
  if (predicted(grad, far) == target) {
    throw NotFoundError(fmt::format("no adversarial example within epsilon {} for class {}",
                                    attack.epsilon, target));
  }
  double span_inf = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) span_inf = std::max(span_inf, std::abs(far[j] - x[j]));
  auto point_at = [&](double lambda) {
    std::vector<double> p(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) p[j] = x[j] + lambda * (far[j] - x[j]);
    return p;
  };
  double lo = 0.0, hi = 1.0;
  for (std::size_t h = 0; h < config.max_halvings && (hi - lo) * span_inf > config.tolerance; ++h) {
    const double mid = 0.5 * (lo + hi);
    if (predicted(grad, point_at(mid)) == target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  std::vector<double> boundary = point_at(hi);
  for (double& v : boundary) v = std::clamp(v, 0.0, 1.0);
  return {Tensor(x.shape(), std::move(boundary)), false};
}

AttributionMap big(const Model& model, const Tensor& x, std::size_t target,
                   const BigConfig& config) {
  const BoundarySearch search = find_boundary(model, x, target, config);
  if (search.already_misclassified) {
    return make_map(x.shape(), std::vector<double>(x.size(), 0.0), target, "big");
  }
  LogitGradient grad(model);
  return make_map(x.shape(),
                  path_integral(grad, x.data(), search.boundary.data(), target, config.steps),
                  target, "big");
}

AttributionMap agi(const Model& model, const Tensor& x, std::size_t target,
                   const AgiConfig& config) {
  check_input(model, x, target);
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
    throw ValidationError("agi step size must be positive");
  }
  const std::size_t c = model.num_classes();
  const std::size_t k = std::min(config.false_classes, c - 1);
  if (k < 1) throw ValidationError("agi needs at least one false class");

  // k distinct false classes, chosen by hashing class indices with the seed.
  const CounterRng rng(config.seed);
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < c; ++i) if (i != target) others.push_back(i);
  std::sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(rng.bits64(a, kAgiClassKey, 0), a) < std::pair(rng.bits64(b, kAgiClassKey, 0), b);
  });
  others.resize(k);

  LogitGradient grad(model);
  const std::size_t n = x.size();
  std::vector<double> total(n, 0.0);
  std::size_t truncated = 0;
  for (std::size_t false_class : others) {
    std::vector<double> point(x.data().begin(), x.data().end());
    std::vector<double> acc(n, 0.0);
    bool flipped = false;
    for (std::size_t it = 0; it < config.max_iterations; ++it) {
      if (predicted(grad, point) == false_class) {
        flipped = true;
        break;
      }
      const std::vector<double> gi = grad(point, false_class);
      const std::vector<double> gt = grad(point, target);
      for (std::size_t j = 0; j < n; ++j) {
        const double s = gi[j] > 0.0 ? 1.0 : gi[j] < 0.0 ? -1.0 : 0.0;
        const double next = std::clamp(point[j] + config.epsilon * s, 0.0, 1.0);
        acc[j] -= gt[j] * (next - point[j]);
        point[j] = next;
      }
    }
    if (!flipped && predicted(grad, point) == false_class) flipped = true;
    if (!flipped) ++truncated;
    for (std::size_t j = 0; j < n; ++j) total[j] += acc[j];
  }
  for (double& v : total) v /= static_cast<double>(k);
  AttributionMap map = make_map(x.shape(), std::move(total), target, "agi");
  map.truncated_paths = truncated;
  return map;
}

const char* attribution_name(AttributionMethod method) {
  switch (method) {
    case AttributionMethod::kSaliency: return "sm";
    case AttributionMethod::kSmoothGrad: return "sg";
    case AttributionMethod::kIntegratedGradients: return "ig";
    case AttributionMethod::kBig: return "big";
    case AttributionMethod::kAgi: return "agi";
  }
  return "?";
}

AttributionMethod parse_attribution_method(const std::string& name) {
  for (AttributionMethod m : {AttributionMethod::kSaliency, AttributionMethod::kSmoothGrad,
                              AttributionMethod::kIntegratedGradients, AttributionMethod::kBig,
                              AttributionMethod::kAgi}) {
    if (name == attribution_name(m)) return m;
  }
  throw ValidationError("unknown attribution method '" + name + "'");
}

AttributionMap attribute(const Model& model, const Tensor& x, std::size_t target,
                         AttributionMethod method, const AttributionOptions& options) {
  switch (method) {
    case AttributionMethod::kSaliency:
      return saliency_map(model, x, target);
    case AttributionMethod::kSmoothGrad:
      return smoothgrad(model, x, target, options.sg_samples, options.sg_sigma, options.seed);
    case AttributionMethod::kIntegratedGradients:
      return integrated_gradients(model, x, target, options.ig);
    case AttributionMethod::kBig:
      return big(model, x, target, options.big);
    case AttributionMethod::kAgi: {
      AgiConfig c = options.agi;
      c.seed = options.seed;
      return agi(model, x, target, c);
    }
  }
  throw ValidationError("unknown attribution method");
}

std::string CurveResult::to_csv() const {
  std::string out = "fraction,probability\n";
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    out += format_number(fractions[i]) + "," + format_number(probabilities[i]) + "\n";
  }
  return out;
}

namespace {

struct PixelLayout {
  std::size_t pixels;
  std::size_t channels;  // features per pixel, strided by `pixels`
};

PixelLayout layout_of(const Shape& s) {
  if (s.size() >= 3) return {s[s.size() - 2] * s[s.size() - 1], shape_size(s) / (s[s.size() - 2] * s[s.size() - 1])};
  return {shape_size(s), 1};
}

}  // namespace

std::vector<std::size_t> rank_pixels(const AttributionMap& map) {
  const PixelLayout l = layout_of(map.values.shape());
  std::vector<double> score(l.pixels, 0.0);
  for (std::size_t c = 0; c < l.channels; ++c) {
    for (std::size_t p = 0; p < l.pixels; ++p) score[p] += map.values[c * l.pixels + p];
  }
  std::vector<std::size_t> order(l.pixels);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return order;
}

std::pair<CurveResult, CurveResult> insertion_deletion(const Model& model, const Tensor& x,
                                                       std::size_t target,
                                                       const AttributionMap& map,
                                                       std::size_t steps,
                                                       const std::optional<Tensor>& baseline) {
  check_input(model, x, target);
  if (map.values.shape() != x.shape()) throw ShapeError("attribution map shape differs from input");
  if (steps < 1) throw ValidationError("insertion/deletion needs at least one step");
  const Tensor base = baseline.value_or(Tensor(x.shape(), 0.0));
  if (base.shape() != x.shape()) throw ShapeError("baseline shape differs from input");

  const PixelLayout l = layout_of(x.shape());
  const std::vector<std::size_t> order = rank_pixels(map);
  steps = std::min(steps, l.pixels);
  const std::size_t per = l.pixels / steps;

  // Image k of each curve has the top revealed[k] pixels switched.
  std::vector<std::size_t> revealed{0};
  for (std::size_t b = 1; b <= steps; ++b) revealed.push_back(b == steps ? l.pixels : b * per);

  const std::size_t n = x.size();
  std::vector<double> images_ins, images_del;
  images_ins.reserve(revealed.size() * n);
  images_del.reserve(revealed.size() * n);
  std::vector<double> ins(base.data().begin(), base.data().end());
  std::vector<double> del(x.data().begin(), x.data().end());
  for (std::size_t k = 0; k < revealed.size(); ++k) {
    if (k > 0) {
      for (std::size_t r = revealed[k - 1]; r < revealed[k]; ++r) {
        for (std::size_t c = 0; c < l.channels; ++c) {
          const std::size_t j = c * l.pixels + order[r];
          ins[j] = x[j];
          del[j] = base[j];
        }
      }
    }
    images_ins.insert(images_ins.end(), ins.begin(), ins.end());
    images_del.insert(images_del.end(), del.begin(), del.end());
  }
  Shape shape = batched(x.shape());
  shape[0] = revealed.size();
  auto curve = [&](std::vector<double> images, bool insertion) {
    const Tensor probs = softmax_rows(predict_logits(model, Tensor(shape, std::move(images))));
    CurveResult r;
    r.insertion = insertion;
    const std::size_t c = model.num_classes();
    for (std::size_t k = 0; k < revealed.size(); ++k) {
      r.fractions.push_back(static_cast<double>(revealed[k]) / static_cast<double>(l.pixels));
      r.probabilities.push_back(probs[k * c + target]);
    }
    for (std::size_t k = 1; k < revealed.size(); ++k) {
      r.auc += (r.fractions[k] - r.fractions[k - 1]) *
               (r.probabilities[k] + r.probabilities[k - 1]) / 2.0;
    }
    return r;
  };
  return {curve(std::move(images_ins), true), curve(std::move(images_del), false)};
}

std::string heatmap_pgm(const AttributionMap& map) {
  const Shape& s = map.values.shape();
  if (s.size() != 2 && s.size() != 3) {
    throw ValidationError("heatmaps need a 2-D or channels x 2-D map, got " + shape_string(s));
  }
  const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
  const std::size_t pixels = h * w, channels = map.values.size() / pixels;
  std::vector<double> a(pixels, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t p = 0; p < pixels; ++p) a[p] += std::abs(map.values[c * pixels + p]);
  }
  const double mx = *std::max_element(a.begin(), a.end());
  std::string out = fmt::format("P5\n{} {}\n255\n", w, h);
  for (double v : a) {
    out.push_back(static_cast<char>(mx > 0.0 ? std::lround(255.0 * v / mx) : 0));
  }
  return out;
}

void render_heatmap(const AttributionMap& map, const std::filesystem::path& path) {
  const std::string bytes = heatmap_pgm(map);
  write_bytes(path, std::span(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
}

}  // namespace compass
