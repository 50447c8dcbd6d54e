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

#include "compass/attacks.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "compass/errors.h"
#include "compass/random.h"

namespace compass {
namespace {

enum Stream : std::uint32_t {
  kDiApply = 20,
  kDiHeight,
  kDiWidth,
  kDiTop,
  kDiLeft,
  kPgdStart,
};

constexpr AttackMethod kAllMethods[] = {
    AttackMethod::kFgsm,   AttackMethod::kIFgsm,    AttackMethod::kMiFgsm, AttackMethod::kDiFgsm,
    AttackMethod::kTiFgsm, AttackMethod::kSiniFgsm, AttackMethod::kPgd,
};

double sign(double v) { return v > 0.0 ? 1.0 : v < 0.0 ? -1.0 : 0.0; }

// x' <- clamp(clip(x' + size * sign(dir), x - eps, x + eps), 0, 1)
void signed_step(std::vector<double>& adv, std::span<const double> orig,
                 const std::vector<double>& dir, double size, double eps) {
  for (std::size_t i = 0; i < adv.size(); ++i) {
    double v = adv[i] + size * sign(dir[i]);
    v = std::min(std::max(v, orig[i] - eps), orig[i] + eps);
    adv[i] = std::clamp(v, 0.0, 1.0);
  }
}

struct Spatial {
  std::size_t planes, h, w;
};

Spatial spatial_of(const Shape& s, const char* method) {
  if (s.size() < 2) {
    throw ValidationError(std::string(method) + " needs inputs with two spatial axes");
  }
  const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
  return {shape_size(s) / (h * w), h, w};
}

// Per-sample attack state: one network of batch size 1 shared by all samples.
class SampleAttacker {
 public:
  SampleAttacker(Network& net, const AttackConfig& cfg, Shape sample_shape)
      : net_(net), cfg_(cfg), rng_(cfg.seed), sample_shape_(std::move(sample_shape)) {
    batch_shape_ = {1};
    batch_shape_.insert(batch_shape_.end(), sample_shape_.begin(), sample_shape_.end());
    if (cfg.method == AttackMethod::kTiFgsm) {
      spatial_of(sample_shape_, "ti-fgsm");
      kernel_ = gaussian_kernel(cfg.kernel_size);
    }
    if (cfg.method == AttackMethod::kDiFgsm) spatial_of(sample_shape_, "di-fgsm");
  }

  std::vector<double> run(std::span<const double> x, std::uint32_t label, std::uint64_t id) {
    label_ = label;
    id_ = id;
    std::vector<double> adv(x.begin(), x.end());
    if (cfg_.method == AttackMethod::kFgsm) {
      signed_step(adv, x, gradient(adv), cfg_.epsilon, cfg_.epsilon);
      return adv;
    }
    if (cfg_.method == AttackMethod::kPgd && cfg_.random_start) {
      for (std::size_t i = 0; i < adv.size(); ++i) {
        const double u = rng_.uniform(id, kPgdStart, static_cast<std::uint32_t>(i));
        adv[i] = std::clamp(x[i] + cfg_.epsilon * (2.0 * u - 1.0), 0.0, 1.0);
      }
    }
    const bool uses_momentum = (cfg_.method == AttackMethod::kMiFgsm ||
                                cfg_.method == AttackMethod::kSiniFgsm) &&
                               cfg_.momentum > 0.0;
    std::vector<double> g(adv.size(), 0.0);
    for (std::size_t t = 0; t < cfg_.steps; ++t) {
      std::vector<double> gt = variant_gradient(adv, g, static_cast<std::uint32_t>(t));
      if (uses_momentum) {
        double l1 = 0.0;
        for (double v : gt) l1 += std::abs(v);
        for (std::size_t i = 0; i < g.size(); ++i) {
          g[i] = cfg_.momentum * g[i] + (l1 > 0.0 ? gt[i] / l1 : 0.0);
        }
        signed_step(adv, x, g, cfg_.alpha, cfg_.epsilon);
      } else {
        signed_step(adv, x, gt, cfg_.alpha, cfg_.epsilon);
      }
    }
    return adv;
  }

 private:
  std::vector<double> gradient(const std::vector<double>& point) {
    Tensor grad;
    const std::uint32_t label[] = {label_};
    net_.loss_gradient(Tensor(batch_shape_, point), label, &grad);
    return grad.values();
  }

  std::vector<double> variant_gradient(const std::vector<double>& adv,
                                       const std::vector<double>& g, std::uint32_t t) {
    switch (cfg_.method) {
      case AttackMethod::kDiFgsm:
        return diverse_gradient(adv, t);
      case AttackMethod::kTiFgsm:
        return convolve_reflect(gradient(adv), sample_shape_, kernel_, cfg_.kernel_size);
      case AttackMethod::kSiniFgsm: {
        std::vector<double> look(adv.size());
        for (std::size_t i = 0; i < adv.size(); ++i) {
          look[i] = adv[i] + cfg_.alpha * cfg_.momentum * g[i];
        }
        std::vector<double> acc(adv.size(), 0.0);
        double scale = 1.0;
        std::vector<double> scaled(adv.size());
        for (std::size_t c = 0; c < cfg_.scale_copies; ++c, scale /= 2.0) {
          for (std::size_t i = 0; i < adv.size(); ++i) scaled[i] = look[i] * scale;
          const std::vector<double> gc = gradient(scaled);
          for (std::size_t i = 0; i < adv.size(); ++i) acc[i] += gc[i] * scale;
        }
        for (double& v : acc) v /= static_cast<double>(cfg_.scale_copies);
        return acc;
      }
      default:
        return gradient(adv);
    }
  }

  // Gradient through a random resize-and-pad of the input. The transform
  // only copies pixels, so its adjoint scatters gradients back along the
  // same index map.
  std::vector<double> diverse_gradient(const std::vector<double>& adv, std::uint32_t t) {
    if (!(rng_.uniform(id_, kDiApply, t) < cfg_.diversity_prob)) return gradient(adv);
    const Spatial sp = spatial_of(sample_shape_, "di-fgsm");
    auto side = [&](std::size_t full, std::uint32_t stream) {
      const auto lo = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(cfg_.resize_min * static_cast<double>(full))));
      return lo + rng_.below(full - lo + 1, id_, stream, t);
    };
    const std::size_t sh = side(sp.h, kDiHeight), sw = side(sp.w, kDiWidth);
    const std::size_t top = rng_.below(sp.h - sh + 1, id_, kDiTop, t);
    const std::size_t left = rng_.below(sp.w - sw + 1, id_, kDiLeft, t);
    std::vector<std::optional<std::size_t>> source(adv.size());
    for (std::size_t p = 0; p < sp.planes; ++p) {
      for (std::size_t i = 0; i < sh; ++i) {
        for (std::size_t j = 0; j < sw; ++j) {
          const std::size_t si = i * sp.h / sh, sj = j * sp.w / sw;
          source[(p * sp.h + top + i) * sp.w + left + j] = (p * sp.h + si) * sp.w + sj;
        }
      }
    }
    std::vector<double> transformed(adv.size(), 0.0);
    for (std::size_t k = 0; k < adv.size(); ++k) {
      if (source[k]) transformed[k] = adv[*source[k]];
    }
    const std::vector<double> gt = gradient(transformed);
    std::vector<double> grad(adv.size(), 0.0);
    for (std::size_t k = 0; k < adv.size(); ++k) {
      if (source[k]) grad[*source[k]] += gt[k];
    }
    return grad;
  }

  Network& net_;
  const AttackConfig& cfg_;
  CounterRng rng_;
  Shape sample_shape_;
  Shape batch_shape_;
  std::vector<double> kernel_;
  std::uint32_t label_ = 0;
  std::uint64_t id_ = 0;
};

AdversarialBatch attack_batch(const Model& model, const LabeledDataset& batch,
                              const AttackConfig& config) {
  validate_attack(config);
  if (batch.empty()) throw ValidationError("cannot attack an empty batch");
  if (batch.num_classes() != model.num_classes() || batch.sample_shape() != model.input_shape()) {
    throw ValidationError("batch does not match the input shape or classes of " + model.name());
  }
  Network net(model, 1);
  SampleAttacker attacker(net, config, batch.sample_shape());
  const std::size_t stride = batch.sample_size();
  std::vector<double> adv;
  adv.reserve(batch.inputs().size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto x = batch.inputs().data().subspan(i * stride, stride);
    const std::vector<double> a = attacker.run(x, batch.labels()[i], batch.ids()[i]);
    adv.insert(adv.end(), a.begin(), a.end());
  }
  const std::vector<std::uint32_t> pred = predicted_classes(predict_logits(model, batch.inputs()));
  AdversarialBatch out;
  out.clean = batch.inputs();
  out.adversarial = Tensor(batch.inputs().shape(), std::move(adv));
  out.labels = batch.labels();
  out.ids = batch.ids();
  out.source_correct.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) out.source_correct[i] = pred[i] == batch.labels()[i];
  out.source_model = model.name();
  out.method = attack_name(config.method);
  return out;
}

}  // namespace

const char* attack_name(AttackMethod method) {
  switch (method) {
    case AttackMethod::kFgsm: return "fgsm";
    case AttackMethod::kIFgsm: return "i-fgsm";
    case AttackMethod::kMiFgsm: return "mi-fgsm";
    case AttackMethod::kDiFgsm: return "di-fgsm";
    case AttackMethod::kTiFgsm: return "ti-fgsm";
    case AttackMethod::kSiniFgsm: return "sini-fgsm";
    case AttackMethod::kPgd: return "pgd";
  }
  return "?";
}

AttackMethod parse_attack_method(const std::string& name) {
  for (AttackMethod m : kAllMethods) {
    if (name == attack_name(m)) return m;
  }
  throw ValidationError("unknown attack method '" + name + "'");
}

AttackConfig default_attack_config(AttackMethod method) {
  AttackConfig c;
  c.method = method;
  return c;
}

void validate_attack(const AttackConfig& c) {
  auto reject = [](const std::string& why) { throw ValidationError("attack config: " + why); };
  if (!(c.epsilon > 0.0) || !std::isfinite(c.epsilon)) reject("epsilon must be positive");
  if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) reject("alpha must be positive");
  if (c.steps < 1) reject("steps must be at least 1");
  if (!(c.momentum >= 0.0) || !std::isfinite(c.momentum)) reject("momentum must be >= 0");
  if (c.kernel_size < 1 || c.kernel_size % 2 == 0) reject("kernel size must be odd and >= 1");
  if (c.scale_copies < 1) reject("scale copies must be >= 1");
  if (!(c.diversity_prob >= 0.0 && c.diversity_prob <= 1.0)) {
    reject("diversity probability must lie in [0, 1]");
  }
  if (!(c.resize_min > 0.0 && c.resize_min <= 1.0)) reject("resize minimum must lie in (0, 1]");
}

std::vector<double> gaussian_kernel(std::size_t k) {
  if (k < 1 || k % 2 == 0) throw ValidationError("kernel size must be odd and >= 1");
  const double sigma = static_cast<double>(k) / 3.0;
  const long r = static_cast<long>(k / 2);
  std::vector<double> kernel(k * k);
  double sum = 0.0;
  for (long i = -r; i <= r; ++i) {
    for (long j = -r; j <= r; ++j) {
      const double v = std::exp(-static_cast<double>(i * i + j * j) / (2.0 * sigma * sigma));
      kernel[static_cast<std::size_t>((i + r) * static_cast<long>(k) + j + r)] = v;
      sum += v;
    }
  }
  for (double& v : kernel) v /= sum;
  return kernel;
}

std::vector<double> convolve_reflect(std::span<const double> data, const Shape& sample_shape,
                                     std::span<const double> kernel, std::size_t k) {
  const Spatial sp = spatial_of(sample_shape, "convolution");
  if (kernel.size() != k * k) throw ShapeError("kernel size mismatch");
  auto reflect = [](long i, long n) {
    const long period = 2 * n;
    long m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
  };
  const long r = static_cast<long>(k / 2);
  const long h = static_cast<long>(sp.h), w = static_cast<long>(sp.w);
  std::vector<double> out(data.size(), 0.0);
  for (std::size_t p = 0; p < sp.planes; ++p) {
    const std::size_t base = p * sp.h * sp.w;
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        double s = 0.0;
        for (long a = -r; a <= r; ++a) {
          for (long b = -r; b <= r; ++b) {
            const double kv = kernel[static_cast<std::size_t>((a + r) * static_cast<long>(k) + b + r)];
            s += kv * data[base + static_cast<std::size_t>(reflect(y + a, h) * w + reflect(x + b, w))];
          }
        }
        out[base + static_cast<std::size_t>(y * w + x)] = s;
      }
    }
  }
  return out;
}

AdversarialBatch fgsm(const Model& model, const LabeledDataset& batch, const AttackConfig& config) {
  if (config.method != AttackMethod::kFgsm) throw ValidationError("fgsm() needs method fgsm");
  return attack_batch(model, batch, config);
}

AdversarialBatch iterative_attack(const Model& model, const LabeledDataset& batch,
                                  const AttackConfig& config) {
  if (config.method == AttackMethod::kFgsm || config.method == AttackMethod::kPgd) {
    throw ValidationError(std::string("iterative_attack() does not run ") +
                          attack_name(config.method));
  }
  return attack_batch(model, batch, config);
}

AdversarialBatch pgd(const Model& model, const LabeledDataset& batch, const AttackConfig& config) {
  if (config.method != AttackMethod::kPgd) throw ValidationError("pgd() needs method pgd");
  return attack_batch(model, batch, config);
}

AdversarialBatch run_attack(const Model& model, const LabeledDataset& batch,
                            const AttackConfig& config) {
  return attack_batch(model, batch, config);
}

std::string TransferResult::to_csv() const {
  std::string out = "Source,Method";
  for (const std::string& t : targets) out += "," + t;
  out += "\n";
  auto row = [&](const TransferRow& r) {
    out += source + "," + r.method;
    for (double v : r.asr) out += "," + format_number(v);
    out += "\n";
  };
  for (const TransferRow& r : rows) row(r);
  row(average);
  return out;
}

TransferResult evaluate_transfer(const Model& source, std::span<const Model* const> targets,
                                 const LabeledDataset& dataset,
                                 std::span<const AttackConfig> configs) {
  for (const Model* t : targets) {
    if (t->input_shape() != source.input_shape() || t->num_classes() != source.num_classes()) {
      throw ValidationError("model " + t->name() + " is incompatible with source " +
                            source.name());
    }
  }
  if (configs.empty()) throw ValidationError("evaluate_transfer needs at least one attack");
  TransferResult result;
  result.source = source.name();
  for (const Model* t : targets) result.targets.push_back(t->name());
  result.average = {"Average", 0.0, std::vector<double>(targets.size(), 0.0)};
  for (const AttackConfig& config : configs) {
    const AdversarialBatch batch = run_attack(source, dataset, config);
    TransferRow row{attack_name(config.method), attack_success_rate(batch, source), {}};
    for (const Model* t : targets) {
      row.asr.push_back(t == &source ? row.white_box : attack_success_rate(batch, *t));
    }
    result.rows.push_back(std::move(row));
  }
  for (const TransferRow& r : result.rows) {
    result.average.white_box += r.white_box;
    for (std::size_t j = 0; j < targets.size(); ++j) result.average.asr[j] += r.asr[j];
  }
  const double n = static_cast<double>(result.rows.size());
  result.average.white_box /= n;
  for (double& v : result.average.asr) v /= n;
  return result;
}

}  // namespace compass
