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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "compass/dataset.h"
#include "compass/errors.h"
#include "support/linear_models.h"

namespace compass {
namespace {

using testing::logistic_unit;

// Two-class linear model with logits [u.x, v.x] over d features.
Model two_logit(const std::vector<double>& u, const std::vector<double>& v) {
  const std::size_t d = u.size();
  std::vector<double> w(d * 2);
  for (std::size_t i = 0; i < d; ++i) {
    w[i * 2] = u[i];
    w[i * 2 + 1] = v[i];
  }
  return Model("two-logit", {d}, 2, {LayerSpec::dense(d, 2)}, {Tensor({d, 2}, w), Tensor({2})});
}

double logit(const Model& m, const Tensor& x, std::size_t t) {
  return predict_logits(m, x.reshaped([&] {
           Shape s{1};
           s.insert(s.end(), x.shape().begin(), x.shape().end());
           return s;
         }()))[t];
}

TEST(Saliency, LinearAndConstantModels) {
  const Model m = logistic_unit({0.3, -1.2, 2.0}, 0.5);
  const Tensor x({3}, {0.2, 0.4, 0.9});
  EXPECT_EQ(saliency_map(m, x, 1).values, Tensor({3}, {0.3, -1.2, 2.0}));
  EXPECT_EQ(saliency_map(m, x, 0).values, Tensor({3}, 0.0));
  const Model flat = logistic_unit({0.0, 0.0, 0.0}, 1.0);
  EXPECT_EQ(saliency_map(flat, x, 1).values, Tensor({3}, 0.0));
}

TEST(Saliency, MatchesFiniteDifferencesOnCnn) {
  const Model cnn = reference_models().cnn;
  const LabeledDataset test = reference_dataset("test");
  for (std::size_t i : {0u, 7u, 19u}) {
    const Tensor x = test.input(i).reshaped(cnn.input_shape());
    for (std::size_t t = 0; t < 4; ++t) {
      const Tensor sm = saliency_map(cnn, x, t).values;
      const Tensor fd = numeric_gradient([&](const Tensor& p) { return logit(cnn, p, t); }, x, 1e-6);
      for (std::size_t j = 0; j < sm.size(); ++j) {
        const double scale = std::max(std::abs(sm[j]), std::abs(fd[j]));
        if (scale < 1e-7) continue;
        EXPECT_LE(std::abs(sm[j] - fd[j]) / scale, 1e-4) << "sample " << i << " pixel " << j;
      }
    }
  }
}

TEST(SmoothGrad, ZeroSigmaIsSaliency) {
  const Model cnn = reference_models().cnn;
  const Tensor x = reference_dataset("test").input(2).reshaped(cnn.input_shape());
  const Tensor sm = saliency_map(cnn, x, 1).values;
  for (std::size_t n : {1u, 3u, 10u}) EXPECT_EQ(smoothgrad(cnn, x, 1, n, 0.0, 5).values, sm);
}

TEST(SmoothGrad, LinearModelGivesWeights) {
  const Model m = logistic_unit({0.3, -1.2}, 0.0);
  EXPECT_EQ(smoothgrad(m, Tensor({2}, {0.5, 0.5}), 1, 17, 0.4, 2).values, Tensor({2}, {0.3, -1.2}));
}

TEST(SmoothGrad, SeededAndNoisy) {
  const Model cnn = reference_models().cnn;
  const Tensor x = reference_dataset("test").input(2).reshaped(cnn.input_shape());
  const Tensor a = smoothgrad(cnn, x, 1, 4, 0.2, 5).values;
  EXPECT_EQ(a, smoothgrad(cnn, x, 1, 4, 0.2, 5).values);
  EXPECT_NE(a, smoothgrad(cnn, x, 1, 4, 0.2, 6).values);
  EXPECT_NE(a, saliency_map(cnn, x, 1).values);
  EXPECT_THROW(smoothgrad(cnn, x, 1, 0, 0.2, 5), ValidationError);
}

TEST(IntegratedGradients, LinearClosedForm) {
  const Model m = logistic_unit({1.0, 2.0}, 0.0);
  const Tensor x({2}, {0.5, 0.5});
  for (std::size_t steps : {1u, 7u, 50u}) {
    const Tensor ig = integrated_gradients(m, x, 1, {.baseline = {}, .steps = steps}).values;
    EXPECT_NEAR(ig[0], 0.5, 1e-12);
    EXPECT_NEAR(ig[1], 1.0, 1e-12);
    EXPECT_NEAR(ig[0] + ig[1], logit(m, x, 1) - logit(m, Tensor({2}), 1), 1e-12);
  }
  const Tensor same = integrated_gradients(m, x, 1, {.baseline = x, .steps = 9}).values;
  EXPECT_EQ(same, Tensor({2}, 0.0));
}

// The CNN is piecewise linear, so the midpoint error comes from the few
// steps whose interval straddles a kink and shrinks roughly like 1/m. A
// relative bound is meaningless when F(x) - F(x') is near zero, hence the
// floor of one logit unit.
TEST(IntegratedGradients, CompletenessOnCnnConverges) {
  const Model cnn = reference_models().cnn;
  const LabeledDataset test = reference_dataset("test");
  std::vector<double> mean_error;
  for (std::size_t steps : {30u, 300u, 2000u}) {
    double total = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      const Tensor x = test.input(i).reshaped(cnn.input_shape());
      const std::size_t t = argmax(predict_logits(cnn, test.input(i)).data());
      const double delta = logit(cnn, x, t) - logit(cnn, Tensor(x.shape()), t);
      const Tensor ig = integrated_gradients(cnn, x, t, {.baseline = {}, .steps = steps}).values;
      double sum = 0.0;
      for (double v : ig.data()) sum += v;
      const double error = std::abs(sum - delta);
      total += error;
      if (steps == 2000) {
        EXPECT_LE(error, 0.01 * std::max(std::abs(delta), 1.0)) << "sample " << i;
      }
    }
    mean_error.push_back(total / 8);
  }
  EXPECT_GT(mean_error[0], mean_error[1]);
  EXPECT_GT(mean_error[1], mean_error[2]);
}

TEST(IntegratedGradients, RejectsBadPaths) {
  const Model m = logistic_unit({1.0, 2.0}, 0.0);
  const Tensor x({2}, {0.5, 0.5});
  EXPECT_THROW(integrated_gradients(m, x, 1, {.baseline = {}, .steps = 0}), ValidationError);
  EXPECT_THROW(integrated_gradients(m, x, 1, {.baseline = Tensor({3}), .steps = 2}), ShapeError);
  EXPECT_THROW(integrated_gradients(m, x, 1, {.baseline = Tensor({2}, 2.0), .steps = 2}),
               ValidationError);
  EXPECT_THROW(integrated_gradients(m, x, 2, {}), ValidationError);
}

TEST(Big, BoundaryOnLinearHyperplane) {
  const std::vector<double> w{1.0, -0.5, 0.75};
  const double b = -0.4;
  const Model m = logistic_unit(w, b);
  const Tensor x({3}, {0.7, 0.2, 0.5});  // w.x + b = 0.575 > 0: class 1
  BigConfig c;
  c.attack.epsilon = 0.5;
  c.attack.alpha = 0.1;
  const BoundarySearch s = find_boundary(m, x, 1, c);
  ASSERT_FALSE(s.already_misclassified);
  double z = b, l1 = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    z += w[j] * s.boundary[j];
    l1 += std::abs(w[j]);
  }
  EXPECT_LE(z, 0.0);  // adversarial side
  EXPECT_LE(std::abs(z), l1 * c.tolerance);
}

TEST(Big, AlreadyMisclassifiedGivesZeroMap) {
  const Model m = logistic_unit({1.0, 1.0}, -0.5);
  const Tensor x({2}, {0.1, 0.1});  // class 0
  EXPECT_EQ(big(m, x, 1, BigConfig{}).values, Tensor({2}, 0.0));
}

TEST(Big, NoAdversarialWithinBudget) {
  const Model m = logistic_unit({1.0, 1.0}, -0.5);
  const Tensor x({2}, {0.9, 0.9});  // margin 1.3 / |w|_1 = 0.65
  BigConfig c;
  c.attack.epsilon = 0.1;
  EXPECT_THROW(big(m, x, 1, c), NotFoundError);
}

TEST(Big, CompletenessAlongSegmentOnCnn) {
  const Model cnn = reference_models().cnn;
  const LabeledDataset test = reference_dataset("test");
  BigConfig c;
  c.attack.epsilon = 0.3;
  c.attack.alpha = 0.05;
  c.attack.steps = 20;
  c.steps = 300;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < 10 && checked < 3; ++i) {
    const Tensor x = test.input(i).reshaped(cnn.input_shape());
    const std::size_t t = test.labels()[i];
    if (argmax(predict_logits(cnn, test.input(i)).data()) != t) continue;
    const BoundarySearch s = find_boundary(cnn, x, t, c);
    const Tensor map = big(cnn, x, t, c).values;
    double sum = 0.0;
    for (double v : map.data()) sum += v;
    const double delta = logit(cnn, x, t) - logit(cnn, s.boundary, t);
    EXPECT_LE(std::abs(sum - delta), 0.01 * std::abs(delta));
    ++checked;
  }
  EXPECT_EQ(checked, 3u);
}

// Step-by-step replay of the accumulation on a linear model, where every
// gradient is a weight column.
std::vector<double> agi_oracle(const std::vector<double>& u, const std::vector<double>& v,
                               std::vector<double> x, std::size_t t, double eps, std::size_t iters) {
  const std::vector<double>& wt = t == 0 ? u : v;
  const std::vector<double>& wi = t == 0 ? v : u;
  std::vector<double> acc(x.size(), 0.0);
  for (std::size_t it = 0; it < iters; ++it) {
    double zt = 0, zi = 0;
    for (std::size_t j = 0; j < x.size(); ++j) zt += wt[j] * x[j], zi += wi[j] * x[j];
    const bool false_wins = t == 0 ? zi > zt : zi >= zt;  // ties go to class 0
    if (false_wins) break;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double s = wi[j] > 0 ? 1 : wi[j] < 0 ? -1 : 0;
      const double next = std::clamp(x[j] + eps * s, 0.0, 1.0);
      acc[j] -= wt[j] * (next - x[j]);
      x[j] = next;
    }
  }
  return acc;
}

TEST(Agi, MatchesHandSimulationOnLinearModel) {
  const std::vector<double> u{1.0, -0.5, 0.25}, v{-0.2, 0.8, 0.1};
  const Model m = two_logit(u, v);
  const std::vector<double> x{0.9, 0.1, 0.5};
  for (std::size_t iters : {0u, 1u, 3u, 20u}) {
    AgiConfig c{.epsilon = 0.05, .max_iterations = iters, .false_classes = 1, .seed = 4};
    const AttributionMap map = agi(m, Tensor({3}, x), 0, c);
    const auto expected = agi_oracle(u, v, x, 0, 0.05, iters);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(map.values[j], expected[j], 1e-12);
    EXPECT_EQ(map.truncated_paths, iters < 20 ? 1u : 0u) << iters;
  }
  AgiConfig zero{.epsilon = 0.05, .max_iterations = 0, .false_classes = 1, .seed = 0};
  EXPECT_EQ(agi(m, Tensor({3}, x), 0, zero).values, Tensor({3}, 0.0));
  AgiConfig many{.epsilon = 0.05, .max_iterations = 20, .false_classes = 20, .seed = 0};
  AgiConfig one = many;
  one.false_classes = 1;
  EXPECT_EQ(agi(m, Tensor({3}, x), 0, many).values, agi(m, Tensor({3}, x), 0, one).values);
}

TEST(Agi, DeterministicOnCnn) {
  const Model cnn = reference_models().cnn;
  const Tensor x = reference_dataset("test").input(0).reshaped(cnn.input_shape());
  const AgiConfig c{.epsilon = 0.05, .max_iterations = 20, .false_classes = 2, .seed = 9};
  const AttributionMap a = agi(cnn, x, 0, c);
  EXPECT_EQ(a.values, agi(cnn, x, 0, c).values);
  for (double v : a.values.data()) EXPECT_TRUE(std::isfinite(v));
}

// Curves from one direct forward pass per point.
std::pair<std::vector<double>, std::vector<double>> brute_curves(
    const Model& m, const Tensor& x, std::size_t t, const std::vector<std::size_t>& order,
    std::size_t steps) {
  const std::size_t p = x.size();
  steps = std::min(steps, p);
  std::vector<double> ins, del;
  for (std::size_t k = 0; k <= steps; ++k) {
    const std::size_t revealed = k == steps ? p : k * (p / steps);
    Tensor a(x.shape(), 0.0), b = x;
    for (std::size_t r = 0; r < revealed; ++r) {
      a[order[r]] = x[order[r]];
      b[order[r]] = 0.0;
    }
    for (auto [img, out] : {std::pair{&a, &ins}, std::pair{&b, &del}}) {
      Shape s{1};
      s.insert(s.end(), x.shape().begin(), x.shape().end());
      out->push_back(softmax_rows(predict_logits(m, img->reshaped(s)))[t]);
    }
  }
  return {ins, del};
}

TEST(InsertionDeletion, DecisivePixelExample) {
  const double a = 3.0;
  const Model m = two_logit({a, 0, 0, 0}, {0, 0, 0, 0});
  const Tensor x({4}, {1, 0, 0, 0});
  AttributionMap map{Tensor({4}, {1, 0, 0, 0}), 0, "manual"};
  const auto [ins, del] = insertion_deletion(m, x, 0, map, 4);
  const double s = testing::sigmoid(a);
  EXPECT_EQ(ins.probabilities, (std::vector<double>{0.5, s, s, s, s}));
  EXPECT_EQ(del.probabilities, (std::vector<double>{s, 0.5, 0.5, 0.5, 0.5}));
  EXPECT_EQ(ins.fractions, (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
  EXPECT_NEAR(ins.auc, 0.0625 + 0.875 * s, 1e-15);
  EXPECT_NEAR(del.auc, 0.4375 + 0.125 * s, 1e-15);
}

TEST(InsertionDeletion, ConstantModel) {
  const Model m = Model("const", {4}, 3, {LayerSpec::dense(4, 3)},
                        {Tensor({4, 3}), Tensor({3}, {0.2, -0.1, 0.4})});
  const Tensor x({4}, {0.3, 0.9, 0.1, 0.5});
  AttributionMap map{Tensor({4}, {0.1, 0.4, 0.2, 0.3}), 2, "manual"};
  const auto [ins, del] = insertion_deletion(m, x, 2, map, 3);
  const double p = softmax_rows(Tensor({1, 3}, {0.2, -0.1, 0.4}))[2];
  EXPECT_NEAR(ins.auc, p, 1e-15);
  EXPECT_NEAR(del.auc, p, 1e-15);
}

TEST(InsertionDeletion, MatchesBruteForceOnSmallModels) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t side = 2 + rng() % 3;  // up to 16 pixels
    const std::size_t p = side * side, hidden = 3;
    std::vector<double> w1(p * hidden), b1(hidden), w2(hidden * 3), b2(3), x(p), attr(p);
    for (auto* v : {&w1, &b1, &w2, &b2, &attr}) for (double& e : *v) e = u(rng);
    for (double& e : x) e = (u(rng) + 1) / 2;
    if (trial % 4 == 0) attr.assign(p, 0.5);  // uniform map exercises ties
    const Model m("small", {1, side, side}, 3,
                  {LayerSpec::flatten(), LayerSpec::dense(p, hidden), LayerSpec::relu(),
                   LayerSpec::dense(hidden, 3)},
                  {Tensor({p, hidden}, w1), Tensor({hidden}, b1), Tensor({hidden, 3}, w2),
                   Tensor({3}, b2)});
    const Tensor input({1, side, side}, x);
    const AttributionMap map{Tensor({1, side, side}, attr), 1, "random"};
    const std::size_t steps = 1 + rng() % (p + 3);
    const auto order = rank_pixels(map);
    const auto [ins, del] = insertion_deletion(m, input, 1, map, steps);
    const auto [bi, bd] = brute_curves(m, input, 1, order, steps);
    EXPECT_EQ(ins.probabilities, bi);
    EXPECT_EQ(del.probabilities, bd);
    for (std::size_t k = 1; k < ins.fractions.size(); ++k) {
      EXPECT_LT(ins.fractions[k - 1], ins.fractions[k]);
    }
    EXPECT_EQ(ins.fractions.back(), 1.0);
  }
}

TEST(InsertionDeletion, UniformMapRanksByIndex) {
  AttributionMap map{Tensor({1, 2, 2}, 0.25), 0, "uniform"};
  EXPECT_EQ(rank_pixels(map), (std::vector<std::size_t>{0, 1, 2, 3}));
  AttributionMap mixed{Tensor({1, 2, 2}, {0.1, 0.3, 0.3, -1}), 0, "m"};
  EXPECT_EQ(rank_pixels(mixed), (std::vector<std::size_t>{1, 2, 0, 3}));
}

TEST(InsertionDeletion, UniformMapCurvesMirror) {
  // On a model whose class-0 logit is linear, inserting pixels 0..k and
  // deleting pixels 0..k visit complementary images.
  const Model m = two_logit({0.7, -0.4, 1.1, 0.2}, {0, 0, 0, 0});
  const Tensor x({4}, {0.9, 0.8, 0.6, 0.3});
  const AttributionMap map{Tensor({4}, 1.0), 0, "uniform"};
  const auto [ins, del] = insertion_deletion(m, x, 0, map, 4);
  const auto [bi, bd] = brute_curves(m, x, 0, {0, 1, 2, 3}, 4);
  EXPECT_EQ(ins.probabilities, bi);
  EXPECT_EQ(del.probabilities, bd);
  EXPECT_EQ(ins.probabilities.front(), del.probabilities.back());
  EXPECT_EQ(ins.probabilities.back(), del.probabilities.front());
}

TEST(InsertionDeletion, StepsClampedAndRemainderInLastBatch) {
  const Model m = two_logit({1, 1, 1, 1, 1}, {0, 0, 0, 0, 0});
  const Tensor x({5}, 0.5);
  const AttributionMap map{Tensor({5}, 1.0), 0, "u"};
  EXPECT_EQ(insertion_deletion(m, x, 0, map, 100).first.fractions.size(), 6u);
  EXPECT_EQ(insertion_deletion(m, x, 0, map, 2).first.fractions,
            (std::vector<double>{0.0, 0.4, 1.0}));
  EXPECT_THROW(insertion_deletion(m, x, 0, map, 0), ValidationError);
}

TEST(InsertionDeletion, IgInsertionBeatsDeletionOnCnn) {
  const Model cnn = reference_models().cnn;
  const LabeledDataset test = reference_dataset("test").head(20);
  double ins = 0, del = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Tensor x = test.input(i).reshaped(cnn.input_shape());
    const AttributionMap map = integrated_gradients(cnn, x, test.labels()[i], {});
    const auto curves = insertion_deletion(cnn, x, test.labels()[i], map);
    ins += curves.first.auc;
    del += curves.second.auc;
  }
  EXPECT_GT(ins, del);
}

TEST(Heatmap, ZeroAndHotPixel) {
  const AttributionMap zero{Tensor({1, 2, 3}, 0.0), 0, "z"};
  EXPECT_EQ(heatmap_pgm(zero), std::string("P5\n3 2\n255\n") + std::string(6, '\0'));
  Tensor hot({1, 2, 3}, 0.0);
  hot[4] = -0.3;
  const std::string pgm = heatmap_pgm({hot, 0, "h"});
  std::string expected = std::string("P5\n3 2\n255\n") + std::string(6, '\0');
  expected[11 + 4] = static_cast<char>(255);
  EXPECT_EQ(pgm, expected);
  EXPECT_THROW(heatmap_pgm({Tensor({4}), 0, "v"}), ValidationError);
}

TEST(Heatmap, ChannelSumOfAbsoluteValues) {
  const AttributionMap two{Tensor({2, 1, 2}, {1.0, -0.5, -1.0, 0.0}), 0, "c"};
  const std::string pgm = heatmap_pgm(two);
  EXPECT_EQ(static_cast<unsigned char>(pgm[11]), 255);
  EXPECT_EQ(static_cast<unsigned char>(pgm[12]), 64);  // round(255 * 0.5 / 2)
}

}  // namespace
}  // namespace compass
