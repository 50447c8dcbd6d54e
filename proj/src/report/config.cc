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

#include "compass/config.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "compass/binary_io.h"
#include "compass/errors.h"
#include "compass/random.h"

namespace compass {
namespace {

using Json = nlohmann::ordered_json;

enum SeedDomain : std::uint32_t { kMutantSeeds = 100, kAttackSeeds, kAttributionSeeds };

// A JSON value together with its location in the document.
class Field {
 public:
  Field(const Json& value, std::string path) : value_(value), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw ValidationError(path_ + ": " + message);
  }

  const Json& json() const { return value_; }
  const std::string& path() const { return path_; }

  // Object members; every key must be one of `allowed`.
  void expect_keys(std::initializer_list<const char*> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    for (const auto& [key, _] : value_.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        Field(value_, path_.empty() ? key : path_ + "." + key).fail("unknown key");
      }
    }
  }
  bool has(const char* key) const { return value_.contains(key); }
  Field at(const char* key) const {
    if (!value_.contains(key)) Field(value_, child_path(key)).fail("missing");
    return Field(value_.at(key), child_path(key));
  }
  std::vector<Field> elements() const {
    if (!value_.is_array()) fail("expected an array");
    std::vector<Field> out;
    for (std::size_t i = 0; i < value_.size(); ++i) {
      out.emplace_back(value_[i], fmt::format("{}[{}]", path_, i));
    }
    return out;
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }
  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  std::uint64_t count() const {
    if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<long long>() >= 0)) {
      fail("expected a non-negative integer");
    }
    return value_.get<std::uint64_t>();
  }
  bool boolean() const {
    if (!value_.is_boolean()) fail("expected true or false");
    return value_.get<bool>();
  }

 private:
  std::string child_path(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  const Json& value_;
  std::string path_;
};

// Rethrows a library ValidationError with the field path in front.
template <typename F>
auto located(const Field& f, F&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    f.fail(e.what());
  }
}

std::filesystem::path existing_path(const Field& f, const std::filesystem::path& base) {
  const std::string s = f.string();
  if (s.empty()) f.fail("empty path");
  const std::filesystem::path p = base / s;
  if (!std::filesystem::exists(p)) f.fail("no such file or directory: " + s);
  return p;
}

MutantsModule parse_mutants(const Field& f, std::uint64_t seed) {
  f.expect_keys({"mutations"});
  MutantsModule m;
  if (!f.has("mutations")) {
    for (MutationKind k : default_mutation_kinds()) {
      m.mutations.push_back({.kind = k, .intensity = default_intensity(k), .seed = 0});
    }
  } else {
    for (const Field& e : f.at("mutations").elements()) {
      MutationSpec spec;
      if (e.json().is_string()) {
        spec.kind = located(e, [&] { return parse_mutation_kind(e.string()); });
        spec.intensity = default_intensity(spec.kind);
      } else {
        e.expect_keys({"kind", "intensity", "seed"});
        const Field kind = e.at("kind");
        spec.kind = located(kind, [&] { return parse_mutation_kind(kind.string()); });
        spec.intensity = e.has("intensity") ? e.at("intensity").number()
                                            : default_intensity(spec.kind);
        if (e.has("seed")) spec.seed = e.at("seed").count();
      }
      m.mutations.push_back(spec);
    }
    if (m.mutations.empty()) f.at("mutations").fail("needs at least one mutation");
  }
  const Json* list = f.has("mutations") ? &f.json().at("mutations") : nullptr;
  for (std::size_t i = 0; i < m.mutations.size(); ++i) {
    const bool explicit_seed = list && (*list)[i].is_object() && (*list)[i].contains("seed");
    if (!explicit_seed) m.mutations[i].seed = derive_seed(seed, kMutantSeeds, i);
    const Field where = list ? Field((*list)[i], fmt::format("{}.mutations[{}]", f.path(), i))
                             : f;
    located(where, [&] {
      validate_mutation(m.mutations[i]);
      return 0;
    });
  }
  return m;
}

AttackConfig parse_attack(const Field& e, std::uint64_t seed, std::size_t index) {
  AttackConfig c;
  if (e.json().is_string()) {
    c = default_attack_config(located(e, [&] { return parse_attack_method(e.string()); }));
  } else {
    e.expect_keys({"method", "epsilon", "alpha", "steps", "momentum", "diversity_prob",
                   "resize_min", "kernel_size", "scale_copies", "random_start", "seed"});
    const Field method = e.at("method");
    c = default_attack_config(located(method, [&] { return parse_attack_method(method.string()); }));
    if (e.has("epsilon")) c.epsilon = e.at("epsilon").number();
    if (e.has("alpha")) c.alpha = e.at("alpha").number();
    if (e.has("steps")) c.steps = e.at("steps").count();
    if (e.has("momentum")) c.momentum = e.at("momentum").number();
    if (e.has("diversity_prob")) c.diversity_prob = e.at("diversity_prob").number();
    if (e.has("resize_min")) c.resize_min = e.at("resize_min").number();
    if (e.has("kernel_size")) c.kernel_size = e.at("kernel_size").count();
    if (e.has("scale_copies")) c.scale_copies = e.at("scale_copies").count();
    if (e.has("random_start")) c.random_start = e.at("random_start").boolean();
  }
  c.seed = e.json().is_object() && e.has("seed")
               ? e.at("seed").count()
               : derive_seed(seed, kAttackSeeds, static_cast<std::uint32_t>(index));
  located(e, [&] {
    validate_attack(c);
    return 0;
  });
  return c;
}

AttacksModule parse_attacks(const Field& f, std::uint64_t seed) {
  f.expect_keys({"methods", "samples"});
  AttacksModule m;
  if (f.has("methods")) {
    const std::vector<Field> list = f.at("methods").elements();
    if (list.empty()) f.at("methods").fail("needs at least one attack");
    for (std::size_t i = 0; i < list.size(); ++i) m.attacks.push_back(parse_attack(list[i], seed, i));
  } else {
    for (AttackMethod a : {AttackMethod::kFgsm, AttackMethod::kIFgsm, AttackMethod::kMiFgsm,
                           AttackMethod::kDiFgsm, AttackMethod::kTiFgsm, AttackMethod::kSiniFgsm,
                           AttackMethod::kPgd}) {
      AttackConfig c = default_attack_config(a);
      c.seed = derive_seed(seed, kAttackSeeds, static_cast<std::uint32_t>(m.attacks.size()));
      m.attacks.push_back(c);
    }
  }
  if (f.has("samples")) m.samples = f.at("samples").count();
  return m;
}

AttributionModule parse_attribution(const Field& f, std::uint64_t seed) {
  f.expect_keys({"methods", "samples", "curve_steps", "heatmaps", "sg_samples", "sg_sigma",
                 "ig_steps", "big_steps", "big_epsilon", "agi_epsilon", "agi_max_iterations",
                 "agi_false_classes"});
  AttributionModule m;
  if (f.has("methods")) {
    for (const Field& e : f.at("methods").elements()) {
      m.methods.push_back(located(e, [&] { return parse_attribution_method(e.string()); }));
    }
    if (m.methods.empty()) f.at("methods").fail("needs at least one method");
  } else {
    m.methods = {AttributionMethod::kSaliency, AttributionMethod::kSmoothGrad,
                 AttributionMethod::kIntegratedGradients, AttributionMethod::kBig,
                 AttributionMethod::kAgi};
  }
  auto positive = [&](const char* key, std::size_t& into) {
    if (!f.has(key)) return;
    into = f.at(key).count();
    if (into == 0) f.at(key).fail("must be positive");
  };
  positive("samples", m.samples);
  positive("curve_steps", m.curve_steps);
  positive("sg_samples", m.options.sg_samples);
  positive("ig_steps", m.options.ig.steps);
  positive("big_steps", m.options.big.steps);
  positive("agi_max_iterations", m.options.agi.max_iterations);
  positive("agi_false_classes", m.options.agi.false_classes);
  if (f.has("heatmaps")) m.heatmaps = f.at("heatmaps").boolean();
  if (f.has("sg_sigma")) {
    m.options.sg_sigma = f.at("sg_sigma").number();
    if (m.options.sg_sigma < 0) f.at("sg_sigma").fail("must be non-negative");
  }
  if (f.has("big_epsilon")) {
    m.options.big.attack.epsilon = f.at("big_epsilon").number();
    located(f.at("big_epsilon"), [&] {
      validate_attack(m.options.big.attack);
      return 0;
    });
  }
  if (f.has("agi_epsilon")) {
    m.options.agi.epsilon = f.at("agi_epsilon").number();
    if (m.options.agi.epsilon <= 0) f.at("agi_epsilon").fail("must be positive");
  }
  m.options.seed = derive_seed(seed, kAttributionSeeds);
  m.options.agi.seed = m.options.seed;
  m.options.big.attack.seed = m.options.seed;
  return m;
}

PruningModule parse_pruning(const Field& f, const std::filesystem::path& base) {
  f.expect_keys({"methods", "rates", "scoring_dataset", "scoring_samples"});
  PruningModule m;
  if (f.has("methods")) {
    for (const Field& e : f.at("methods").elements()) {
      m.methods.push_back(located(e, [&] { return parse_importance_method(e.string()); }));
    }
    if (m.methods.empty()) f.at("methods").fail("needs at least one method");
  } else {
    m.methods = {ImportanceMethod::kTaylor, ImportanceMethod::kObdExact,
                 ImportanceMethod::kObdFisher, ImportanceMethod::kMagnitude};
  }
  if (f.has("rates")) {
    m.rates.clear();
    for (const Field& e : f.at("rates").elements()) {
      const double r = e.number();
      if (!(r >= 0.0 && r < 1.0)) e.fail("pruning rate must lie in [0, 1)");
      m.rates.push_back(r);
    }
    if (m.rates.empty()) f.at("rates").fail("needs at least one rate");
  }
  if (f.has("scoring_dataset")) m.scoring_dataset = existing_path(f.at("scoring_dataset"), base);
  if (f.has("scoring_samples")) m.scoring_samples = f.at("scoring_samples").count();
  return m;
}

RadarModule parse_radar(const Field& f) {
  f.expect_keys({"basic_metric", "mutant_metric", "mutant_kind", "attack_metric",
                 "attribution_metric", "pruning_tolerance"});
  RadarModule r;
  auto choice = [&](const char* key, std::string& into, std::initializer_list<const char*> ok) {
    if (!f.has(key)) return;
    const Field v = f.at(key);
    into = v.string();
    if (std::none_of(ok.begin(), ok.end(), [&](const char* o) { return into == o; })) {
      std::string list;
      for (const char* o : ok) list += (list.empty() ? "" : ", ") + std::string(o);
      v.fail("'" + into + "' is not one of " + list);
    }
  };
  choice("basic_metric", r.basic_metric, {"accuracy", "precision", "recall", "f1", "roc_auc", "loss"});
  choice("mutant_metric", r.mutant_metric, {"accuracy", "precision", "recall", "f1", "roc_auc", "loss"});
  if (f.has("mutant_kind")) {
    r.mutant_kind = f.at("mutant_kind").string();
    if (r.mutant_kind != "mean") {
      located(f.at("mutant_kind"), [&] { return parse_mutation_kind(r.mutant_kind); });
    }
  }
  choice("attack_metric", r.attack_metric, {"white-box", "transfer"});
  choice("attribution_metric", r.attribution_metric, {"insertion", "deletion"});
  if (f.has("pruning_tolerance")) {
    r.pruning_tolerance = f.at("pruning_tolerance").number();
    if (r.pruning_tolerance < 0) f.at("pruning_tolerance").fail("must be non-negative");
  }
  return r;
}

}  // namespace

std::vector<std::string> RunConfig::enabled_modules() const {
  std::vector<std::string> out;
  if (metrics) out.push_back("metrics");
  if (mutants) out.push_back("mutants");
  if (attacks) out.push_back("attacks");
  if (attribution) out.push_back("attribution");
  if (pruning) out.push_back("pruning");
  if (radar) out.push_back("radar");
  return out;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  const Field root(doc, "");
  if (!doc.is_object()) throw ValidationError("config: expected a JSON object");
  root.expect_keys({"version", "seed", "models", "dataset", "output", "modules"});
  const Field version = root.at("version");
  if (!version.json().is_number_integer() || version.json().get<long long>() != kConfigVersion) {
    version.fail(fmt::format("unsupported config version (expected {})", kConfigVersion));
  }

  RunConfig cfg;
  cfg.base_dir = base_dir;
  if (root.has("seed")) cfg.seed = root.at("seed").count();
  const std::vector<Field> models = root.at("models").elements();
  if (models.empty()) root.at("models").fail("needs at least one model");
  std::set<std::filesystem::path> seen;
  for (const Field& m : models) {
    std::filesystem::path p = existing_path(m, base_dir);
    if (!seen.insert(p.lexically_normal()).second) m.fail("model listed twice");
    cfg.models.push_back(std::move(p));
  }
  cfg.dataset = existing_path(root.at("dataset"), base_dir);
  cfg.output = base_dir / (root.has("output") ? root.at("output").string() : std::string("out"));

  const Field modules = root.at("modules");
  modules.expect_keys({"metrics", "mutants", "attacks", "attribution", "pruning", "radar"});
  if (modules.has("metrics")) {
    modules.at("metrics").expect_keys({});
    cfg.metrics = true;
  }
  if (modules.has("mutants")) cfg.mutants = parse_mutants(modules.at("mutants"), cfg.seed);
  if (modules.has("attacks")) cfg.attacks = parse_attacks(modules.at("attacks"), cfg.seed);
  if (modules.has("attribution")) {
    cfg.attribution = parse_attribution(modules.at("attribution"), cfg.seed);
  }
  if (modules.has("pruning")) cfg.pruning = parse_pruning(modules.at("pruning"), base_dir);
  if (modules.has("radar")) cfg.radar = parse_radar(modules.at("radar"));
  if (cfg.enabled_modules().empty()) modules.fail("enable at least one module");

  if (cfg.radar) {
    const Field radar = modules.at("radar");
    for (const char* needed : {"metrics", "mutants", "attacks", "attribution", "pruning"}) {
      if (!modules.has(needed)) {
        radar.fail(fmt::format("the radar chart needs the {} module", needed));
      }
    }
    if (cfg.radar->mutant_kind != "mean") {
      const MutationKind kind = parse_mutation_kind(cfg.radar->mutant_kind);
      const auto& list = cfg.mutants->mutations;
      if (std::none_of(list.begin(), list.end(), [&](const MutationSpec& s) { return s.kind == kind; })) {
        Field(radar.json(), radar.path() + ".mutant_kind").fail("'" + cfg.radar->mutant_kind + "' is not a configured mutation");
      }
    }
    if (cfg.radar->attack_metric == "transfer" && cfg.models.size() < 2) {
      Field(radar.json(), radar.path() + ".attack_metric").fail("transfer needs at least two models");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ValidationError("config file not found: " + path.string());
  }
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  return parse_run_config(std::string(bytes.begin(), bytes.end()),
                          path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

}  // namespace compass
