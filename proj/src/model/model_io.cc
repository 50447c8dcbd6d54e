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

#include "compass/binary_io.h"
#include "compass/errors.h"
#include "compass/model.h"

namespace compass {
namespace {

using Json = nlohmann::ordered_json;

Json layer_to_json(const LayerSpec& l) {
  Json j;
  j["kind"] = layer_kind_name(l.kind);
  switch (l.kind) {
    case LayerKind::kDense:
      j["in"] = l.in;
      j["out"] = l.out;
      break;
    case LayerKind::kConv2d:
      j["in_channels"] = l.in;
      j["out_channels"] = l.out;
      j["kernel"] = {l.kernel_h, l.kernel_w};
      j["padding"] = l.padding;
      break;
    case LayerKind::kMaxPool2d:
      j["size"] = l.pool;
      break;
    default:
      break;
  }
  return j;
}

std::size_t get_size(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    throw FormatError(std::string("manifest: missing or invalid '") + key + "'");
  }
  return j[key].get<std::size_t>();
}

Shape get_shape(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw FormatError(std::string("manifest: missing or invalid '") + key + "'");
  }
  Shape s;
  for (const Json& d : j[key]) {
    if (!d.is_number_unsigned()) throw FormatError(std::string("manifest: bad '") + key + "'");
    s.push_back(d.get<std::size_t>());
  }
  return s;
}

LayerSpec layer_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw FormatError("manifest: layer without a kind");
  }
  LayerSpec l;
  l.kind = parse_layer_kind(j["kind"].get<std::string>());
  switch (l.kind) {
    case LayerKind::kDense:
      l.in = get_size(j, "in");
      l.out = get_size(j, "out");
      break;
    case LayerKind::kConv2d: {
      l.in = get_size(j, "in_channels");
      l.out = get_size(j, "out_channels");
      const Shape k = get_shape(j, "kernel");
      if (k.size() != 2) throw FormatError("manifest: conv2d kernel needs two sizes");
      l.kernel_h = k[0];
      l.kernel_w = k[1];
      l.padding = get_size(j, "padding");
      break;
    }
    case LayerKind::kMaxPool2d:
      l.pool = get_size(j, "size");
      break;
    default:
      break;
  }
  return l;
}

}  // namespace

void save_model(const Model& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Json m;
  m["format_version"] = kModelFormatVersion;
  m["name"] = model.name();
  m["num_classes"] = model.num_classes();
  m["input_shape"] = model.input_shape();
  m["layers"] = Json::array();
  for (const LayerSpec& l : model.layers()) m["layers"].push_back(layer_to_json(l));
  m["params"] = Json::array();
  std::vector<double> blob;
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    const auto w = model.weight_index(i);
    if (!w) continue;
    for (std::size_t k = 0; k < 2; ++k) {
      const Tensor& p = model.params()[*w + k];
      m["params"].push_back({{"layer", i}, {"name", k == 0 ? "weight" : "bias"}, {"shape", p.shape()}});
      blob.insert(blob.end(), p.data().begin(), p.data().end());
    }
  }
  m["param_count"] = model.param_count();
  write_json(dir / "manifest", m);
  write_f32(dir / "weights.bin", blob);
}

Model load_model(const std::filesystem::path& dir) {
  const Json m = read_json(dir / "manifest");
  if (!m.is_object()) throw FormatError(dir.string() + ": manifest is not an object");
  if (!m.contains("format_version") || m["format_version"] != kModelFormatVersion) {
    throw FormatError(dir.string() + ": unsupported model format version");
  }
  if (!m.contains("name") || !m["name"].is_string()) {
    throw FormatError(dir.string() + ": manifest lacks a name");
  }
  if (!m.contains("layers") || !m["layers"].is_array()) {
    throw FormatError(dir.string() + ": manifest lacks layers");
  }
  std::vector<LayerSpec> layers;
  for (const Json& l : m["layers"]) layers.push_back(layer_from_json(l));

  // Parameter shapes follow from the layers; the manifest copy is a check.
  std::vector<Shape> shapes;
  for (const LayerSpec& l : layers) {
    if (l.kind == LayerKind::kDense) shapes.push_back({l.in, l.out});
    if (l.kind == LayerKind::kConv2d) shapes.push_back({l.out, l.in, l.kernel_h, l.kernel_w});
    if (l.has_params()) shapes.push_back({l.out});
  }
  if (m.contains("params")) {
    if (!m["params"].is_array() || m["params"].size() != shapes.size()) {
      throw FormatError(dir.string() + ": params list disagrees with layers");
    }
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      if (get_shape(m["params"][i], "shape") != shapes[i]) {
        throw FormatError(dir.string() + ": parameter " + std::to_string(i) +
                          " shape disagrees with its layer");
      }
    }
  }
  std::size_t total = 0;
  for (const Shape& s : shapes) total += shape_size(s);
  const std::vector<double> blob = read_f32(dir / "weights.bin", total);
  std::vector<Tensor> params;
  std::size_t offset = 0;
  for (const Shape& s : shapes) {
    const std::size_t n = shape_size(s);
    params.emplace_back(s, std::vector<double>(blob.begin() + offset, blob.begin() + offset + n));
    offset += n;
  }
  try {
    return Model(m["name"].get<std::string>(), get_shape(m, "input_shape"),
                 get_size(m, "num_classes"), std::move(layers), std::move(params));
  } catch (const ShapeError& e) {
    throw FormatError(dir.string() + ": " + e.what());
  }
}

ReferenceModels reference_models(const std::filesystem::path& fixture_dir) {
  return {load_model(fixture_dir / "tiny_mlp.model"), load_model(fixture_dir / "tiny_cnn.model")};
}

}  // namespace compass
