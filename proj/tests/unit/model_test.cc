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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "compass/binary_io.h"
#include "compass/dataset.h"
#include "compass/errors.h"
#include "support/reference_forward.h"

namespace compass {
namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("compass_model_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

Model identity_model() {
  return Model("identity", {2}, 2, {LayerSpec::dense(2, 2)},
               {Tensor({2, 2}, {1, 0, 0, 1}), Tensor({2}, 0.0)});
}

std::size_t correct(const Model& m, const LabeledDataset& d) {
  const auto pred = predicted_classes(predict_logits(m, d.inputs()));
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += pred[i] == d.labels()[i];
  return ok;
}

TEST(PredictLogits, IdentityDenseModel) {
  const Tensor z = predict_logits(identity_model(), Tensor({1, 2}, {3, 1}));
  EXPECT_EQ(z, Tensor({1, 2}, {3, 1}));
  EXPECT_EQ(predicted_classes(z)[0], 0u);
}

TEST(PredictLogits, ZeroModelTiesGoToLowestClass) {
  Model zero("zero", {3}, 4, {LayerSpec::dense(3, 4)}, {Tensor({3, 4}), Tensor({4})});
  const Tensor z = predict_logits(zero, Tensor({2, 3}, {0.1, 0.2, 0.3, 0.9, 0.8, 0.7}));
  for (double v : z.data()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(predicted_classes(z), (std::vector<std::uint32_t>{0, 0}));
}

TEST(PredictLogits, ArgmaxTieBreak) {
  const std::vector<double> row{1.0, 3.0, 3.0, -1.0};
  EXPECT_EQ(argmax(row), 1u);
}

TEST(PredictLogits, RejectsShapeMismatch) {
  EXPECT_THROW(predict_logits(identity_model(), Tensor({1, 3})), ShapeError);
}

TEST(PredictLogits, MatchesStraightLoopForwardOnReferenceModels) {
  const ReferenceModels refs = reference_models();
  const LabeledDataset test = reference_dataset("test");
  for (const Model* m : {&refs.mlp, &refs.cnn}) {
    const Tensor z = predict_logits(*m, test.inputs());
    ASSERT_EQ(z.shape(), (Shape{test.size(), 4}));
    for (std::size_t i = 0; i < test.size(); ++i) {
      const Tensor x = test.input(i);
      const auto expected = testing::reference_forward(*m, x.values());
      for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_NEAR(z[i * 4 + c], expected[c], 1e-12) << m->name() << " sample " << i;
      }
    }
  }
}

TEST(PredictLogits, IsPureAcrossChunking) {
  // 300 samples cross the internal chunk boundary; results must not depend on it.
  const ReferenceModels refs = reference_models();
  const LabeledDataset train = reference_dataset("train").head(300);
  const Tensor all = predict_logits(refs.cnn, train.inputs());
  const Tensor tail = predict_logits(refs.cnn, train.select(std::vector<std::size_t>{299}).inputs());
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(all[299 * 4 + c], tail[c]);
  EXPECT_EQ(all, predict_logits(refs.cnn, train.inputs()));
}

TEST(ReferenceModels, ParamCountsMatchManifests) {
  const ReferenceModels refs = reference_models();
  const auto mlp = read_json(default_fixture_dir() / "tiny_mlp.model" / "manifest");
  const auto cnn = read_json(default_fixture_dir() / "tiny_cnn.model" / "manifest");
  EXPECT_EQ(refs.mlp.param_count(), mlp["param_count"].get<std::size_t>());
  EXPECT_EQ(refs.cnn.param_count(), cnn["param_count"].get<std::size_t>());
  EXPECT_EQ(refs.mlp.param_count(), 64u * 32 + 32 + 32 * 4 + 4);
  EXPECT_EQ(refs.cnn.param_count(), 4u * 9 + 4 + 64 * 16 + 16 + 16 * 4 + 4);
}

// Pinned when the fixtures were frozen.
TEST(ReferenceModels, PinnedAccuracies) {
  const ReferenceModels refs = reference_models();
  const LabeledDataset train = reference_dataset("train");
  const LabeledDataset test = reference_dataset("test");
  EXPECT_EQ(correct(refs.cnn, train), 400u);
  EXPECT_EQ(correct(refs.mlp, train), 400u);
  EXPECT_GE(correct(refs.cnn, train) / 400.0, 0.95);
  EXPECT_EQ(correct(refs.mlp, test), 161u);
  EXPECT_EQ(correct(refs.cnn, test), 165u);
}

TEST(ReferenceModels, DisagreeOnSomeTestSamples) {
  const ReferenceModels refs = reference_models();
  const LabeledDataset test = reference_dataset("test");
  const auto a = predicted_classes(predict_logits(refs.mlp, test.inputs()));
  const auto b = predicted_classes(predict_logits(refs.cnn, test.inputs()));
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += a[i] != b[i];
  EXPECT_EQ(differ, 47u);
}

TEST(ReferenceModels, MissingFixture) {
  EXPECT_THROW(reference_models(scratch_dir("nothing")), FormatError);
}

TEST(ModelFile, RoundTripOfReferenceModels) {
  const ReferenceModels refs = reference_models();
  for (const Model* m : {&refs.mlp, &refs.cnn}) {
    const auto dir = scratch_dir("roundtrip_" + m->name());
    save_model(*m, dir);
    const Model back = load_model(dir);
    EXPECT_EQ(back.name(), m->name());
    EXPECT_EQ(back.layers(), m->layers());
    EXPECT_EQ(back.input_shape(), m->input_shape());
    EXPECT_EQ(back.num_classes(), m->num_classes());
    // The fixtures already hold f32 values, so they survive exactly.
    EXPECT_EQ(back.params(), m->params());
    EXPECT_EQ(std::filesystem::file_size(dir / "weights.bin"), 4 * m->param_count());
  }
}

TEST(ModelFile, ParamsQuantizedToFloat32) {
  const Model m("q", {2}, 2, {LayerSpec::dense(2, 2)},
                {Tensor({2, 2}, {0.1, 1.0 / 3.0, -2.5, 1e-3}), Tensor({2}, {0.7, -0.2})});
  const auto dir = scratch_dir("quant");
  save_model(m, dir);
  const Model back = load_model(dir);
  for (std::size_t p = 0; p < 2; ++p) {
    for (std::size_t i = 0; i < m.params()[p].size(); ++i) {
      const double v = m.params()[p][i];
      EXPECT_EQ(back.params()[p][i], static_cast<double>(static_cast<float>(v)));
      EXPECT_LE(std::abs(back.params()[p][i] - v), std::abs(v) * 6e-8);
    }
  }
}

TEST(ModelFile, TruncatedBlob) {
  const auto dir = scratch_dir("truncated");
  save_model(reference_models().mlp, dir);
  std::filesystem::resize_file(dir / "weights.bin", 4 * 100);
  EXPECT_THROW(load_model(dir), FormatError);
}

TEST(ModelFile, UnknownLayerKind) {
  const auto dir = scratch_dir("lstm");
  save_model(identity_model(), dir);
  auto manifest = read_json(dir / "manifest");
  manifest["layers"][0]["kind"] = "lstm";
  write_json(dir / "manifest", manifest);
  try {
    load_model(dir);
    FAIL() << "expected an unknown-layer error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown layer kind 'lstm'"), std::string::npos);
  }
}

TEST(ModelFile, CorruptManifest) {
  const auto dir = scratch_dir("corrupt");
  save_model(identity_model(), dir);
  write_text(dir / "manifest", "{ \"format_version\": 1, ");
  EXPECT_THROW(load_model(dir), FormatError);
  write_text(dir / "manifest", "{ \"format_version\": 7 }");
  EXPECT_THROW(load_model(dir), FormatError);
}

TEST(ModelInvariants, RejectsBadSpecs) {
  EXPECT_THROW(Model("one", {2}, 1, {LayerSpec::dense(2, 1)}, {Tensor({2, 1}), Tensor({1})}),
               ShapeError);
  EXPECT_THROW(Model("gap", {3}, 2, {LayerSpec::dense(2, 2)}, {Tensor({2, 2}), Tensor({2})}),
               ShapeError);
  EXPECT_THROW(Model("shape", {2}, 2, {LayerSpec::dense(2, 2)}, {Tensor({2, 3}), Tensor({2})}),
               ShapeError);
  EXPECT_THROW(Model("count", {2}, 2, {LayerSpec::dense(2, 2)}, {Tensor({2, 2})}), ShapeError);
  EXPECT_THROW(Model("soft", {2}, 2, {LayerSpec::dense(2, 2), {.kind = LayerKind::kSoftmax}},
                     {Tensor({2, 2}), Tensor({2})}),
               ShapeError);
  EXPECT_THROW(Model("conv", {8}, 2, {LayerSpec::conv2d(1, 2, 3, 1)},
                     {Tensor({2, 1, 3, 3}), Tensor({2})}),
               ShapeError);
}

TEST(Network, LossAndGradientsAgreeWithFiniteDifferences) {
  const ReferenceModels refs = reference_models();
  const LabeledDataset test = reference_dataset("test");
  const Tensor x = test.input(3);
  const std::vector<std::uint32_t> y{test.labels()[3]};
  Network net(refs.cnn, 1);
  Tensor grad;
  net.loss_gradient(x, y, &grad);
  const Tensor numeric = numeric_gradient([&](const Tensor& p) { return net.loss(p, y); }, x, 1e-6);
  EXPECT_LT(max_abs_diff(grad, numeric), 1e-6);

  const Tensor g1 = net.logit_gradient(x, 1);
  const Tensor n1 = numeric_gradient([&](const Tensor& p) { return net.logits(p)[1]; }, x, 1e-6);
  EXPECT_LT(max_abs_diff(g1, n1), 1e-6);
}

TEST(Network, LossMatchesSoftmaxCrossEntropy) {
  const Model m = identity_model();
  Network net(m, 1);
  const std::vector<std::uint32_t> y{0};
  // logits [3,1]: -log(e^3 / (e^3 + e^1))
  EXPECT_NEAR(net.loss(Tensor({1, 2}, {3, 1}), y), std::log(1 + std::exp(-2.0)), 1e-15);
}

}  // namespace
}  // namespace compass
