#include "basinctl/config.hpp"

#include "basinctl/errors.hpp"
#include "basinctl/models.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace basinctl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& ctx, const std::string& msg) {
  throw ConfigError("config: " + ctx + ": " + msg);
}

void check_keys(const json& obj, const std::string& ctx, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(ctx, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(ctx, "unknown key '" + key + "'");
  }
}

double get_number(const json& obj, const std::string& ctx, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail(ctx, "missing required key '" + key + "'");
  }
  if (!obj[key].is_number()) fail(ctx + "." + key, "expected a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& ctx, const std::string& key,
            std::optional<int> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail(ctx, "missing required key '" + key + "'");
  }
  if (!obj[key].is_number_integer()) fail(ctx + "." + key, "expected an integer");
  return obj[key].get<int>();
}

bool get_bool(const json& obj, const std::string& ctx, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) fail(ctx + "." + key, "expected a boolean");
  return obj[key].get<bool>();
}

std::string get_string(const json& obj, const std::string& ctx, const std::string& key,
                       std::optional<std::string> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    fail(ctx, "missing required key '" + key + "'");
  }
  if (!obj[key].is_string()) fail(ctx + "." + key, "expected a string");
  return obj[key].get<std::string>();
}

Vec get_vector(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.empty()) fail(ctx, "expected a non-empty array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ctx, "expected numbers");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

Box get_box(const json& j, const std::string& ctx) {
  check_keys(j, ctx, {"lower", "upper"});
  if (!j.contains("lower") || !j.contains("upper")) fail(ctx, "box needs 'lower' and 'upper'");
  Box box;
  box.lower = get_vector(j["lower"], ctx + ".lower");
  box.upper = get_vector(j["upper"], ctx + ".upper");
  if (box.lower.size() != box.upper.size()) fail(ctx, "lower/upper dimension mismatch");
  if (((box.upper - box.lower).array() <= 0.0).any()) fail(ctx, "box must have positive extent");
  return box;
}

ModelSpec parse_model(const json& j) {
  check_keys(j, "model", {"name", "x_ref", "nx", "ny", "include_p", "overrides"});
  ModelSpec spec;
  spec.name = get_string(j, "model", "name");
  if (spec.name != "model1d" && spec.name != "model2d" && spec.name != "emt")
    fail("model.name", "unknown model '" + spec.name + "'");
  spec.x_ref = get_number(j, "model", "x_ref", 1.0);
  spec.nx = get_int(j, "model", "nx", 3);
  spec.ny = get_int(j, "model", "ny", 5);
  spec.include_p = get_bool(j, "model", "include_p", false);
  if (j.contains("overrides")) {
    if (!j["overrides"].is_object()) fail("model.overrides", "expected an object");
    for (const auto& [key, value] : j["overrides"].items()) {
      if (!value.is_number()) fail("model.overrides." + key, "expected a number");
      spec.overrides[key] = value.get<double>();
    }
  }
  return spec;
}

CensusSpec parse_census(const json& j) {
  check_keys(j, "census", {"box", "n_seeds"});
  CensusSpec spec;
  if (!j.contains("box")) fail("census", "missing required key 'box'");
  spec.box = get_box(j["box"], "census.box");
  spec.n_seeds = get_int(j, "census", "n_seeds", 200);
  if (spec.n_seeds < 1) fail("census.n_seeds", "must be >= 1");
  return spec;
}

AffineConeSpec parse_cone(const json& j) {
  check_keys(j, "control.cone", {"kind", "indices", "signs", "k"});
  const std::string kind = get_string(j, "control.cone", "kind");
  if (kind == "full") return AffineConeSpec::full();
  if (kind == "subset") {
    if (!j.contains("indices") || !j["indices"].is_array())
      fail("control.cone", "subset cone needs an 'indices' array");
    std::vector<int> idx;
    for (const auto& v : j["indices"]) {
      if (!v.is_number_integer()) fail("control.cone.indices", "expected integers");
      idx.push_back(v.get<int>());
    }
    return AffineConeSpec::subset(idx);
  }
  if (kind == "sign") {
    if (!j.contains("signs") || !j["signs"].is_array())
      fail("control.cone", "sign cone needs a 'signs' array");
    std::vector<int> s;
    for (const auto& v : j["signs"]) {
      if (!v.is_number_integer()) fail("control.cone.signs", "expected integers in {-1,0,1}");
      const int sv = v.get<int>();
      if (sv < -1 || sv > 1) fail("control.cone.signs", "entries must be -1, 0, or 1");
      s.push_back(sv);
    }
    return AffineConeSpec::sign_constrained(s);
  }
  if (kind == "top_k") {
    const int k = get_int(j, "control.cone", "k");
    if (k < 1) fail("control.cone.k", "must be >= 1");
    return AffineConeSpec::top_k(k);
  }
  fail("control.cone.kind", "unknown cone kind '" + kind + "'");
}

ControlSpec parse_control(const json& j) {
  check_keys(j, "control",
             {"mode", "epsilon", "n_ite", "anchor", "eigen", "saddles", "delta_g", "cone",
              "normalize_gradients", "complex_fatal", "rescan_every"});
  ControlSpec spec;
  const std::string mode = get_string(j, "control", "mode", std::string("eigenvalue"));
  if (mode == "eigenvalue") spec.mode = ControlSpec::Mode::Eigenvalue;
  else if (mode == "saddle") spec.mode = ControlSpec::Mode::Saddle;
  else if (mode == "multiobjective") spec.mode = ControlSpec::Mode::MultiObjective;
  else fail("control.mode", "unknown mode '" + mode + "'");

  spec.epsilon = get_number(j, "control", "epsilon", 1e-2);
  if (!(spec.epsilon > 0.0)) fail("control.epsilon", "must be positive");
  spec.n_ite = get_int(j, "control", "n_ite", 1000);
  if (spec.n_ite < 0) fail("control.n_ite", "must be >= 0");
  if (!j.contains("anchor")) fail("control", "missing required key 'anchor'");
  spec.anchor = get_vector(j["anchor"], "control.anchor");

  if (j.contains("eigen")) {
    check_keys(j["eigen"], "control.eigen", {"indices", "auto_tangent", "delta"});
    if (j["eigen"].contains("indices")) {
      if (!j["eigen"]["indices"].is_array()) fail("control.eigen.indices", "expected an array");
      for (const auto& v : j["eigen"]["indices"]) {
        if (!v.is_number_integer()) fail("control.eigen.indices", "expected integers");
        spec.eigen.indices.push_back(v.get<int>());
      }
    }
    spec.eigen.auto_tangent = get_bool(j["eigen"], "control.eigen", "auto_tangent", false);
    spec.eigen.delta = get_number(j["eigen"], "control.eigen", "delta", 1.0);
  }
  if (j.contains("saddles")) {
    check_keys(j["saddles"], "control.saddles", {"mode", "k", "anchors"});
    spec.saddles_given = true;
    const std::string smode = get_string(j["saddles"], "control.saddles", "mode",
                                         std::string("all"));
    if (smode == "all") spec.saddles.mode = SaddleSelection::Mode::AllSaddles;
    else if (smode == "nearest_k") {
      spec.saddles.mode = SaddleSelection::Mode::NearestK;
      spec.saddles.k = get_int(j["saddles"], "control.saddles", "k");
      if (spec.saddles.k < 1) fail("control.saddles.k", "must be >= 1");
    } else if (smode == "anchors") {
      spec.saddles.mode = SaddleSelection::Mode::Anchors;
      if (!j["saddles"].contains("anchors") || !j["saddles"]["anchors"].is_array())
        fail("control.saddles", "anchors mode needs an 'anchors' array");
      for (const auto& a : j["saddles"]["anchors"])
        spec.saddles.anchors.push_back(get_vector(a, "control.saddles.anchors"));
    } else {
      fail("control.saddles.mode", "unknown mode '" + smode + "'");
    }
  }
  spec.delta_g = get_number(j, "control", "delta_g", 0.0);
  if (j.contains("cone")) spec.cone = parse_cone(j["cone"]);
  spec.normalize_gradients = get_bool(j, "control", "normalize_gradients", true);
  spec.complex_fatal = get_bool(j, "control", "complex_fatal", false);
  spec.rescan_every = get_int(j, "control", "rescan_every", 50);
  if (spec.rescan_every < 0) fail("control.rescan_every", "must be >= 0");

  const bool has_eigen = !spec.eigen.empty();
  switch (spec.mode) {
    case ControlSpec::Mode::Eigenvalue:
      if (!has_eigen) fail("control", "eigenvalue mode needs an 'eigen' block");
      break;
    case ControlSpec::Mode::Saddle:
      if (!spec.saddles_given) fail("control", "saddle mode needs a 'saddles' block");
      if (!(spec.delta_g >= 0.0)) fail("control.delta_g", "must be >= 0");
      break;
    case ControlSpec::Mode::MultiObjective:
      if (!has_eigen || !spec.saddles_given)
        fail("control", "multiobjective mode needs 'eigen' and 'saddles' blocks");
      break;
  }
  return spec;
}

BasinSpec parse_basin(const json& j) {
  check_keys(j, "basin", {"box", "n_samples", "t_max", "before_after_control"});
  BasinSpec spec;
  if (!j.contains("box")) fail("basin", "missing required key 'box'");
  spec.box = get_box(j["box"], "basin.box");
  spec.n_samples = get_int(j, "basin", "n_samples", 10000);
  if (spec.n_samples < 1) fail("basin.n_samples", "must be >= 1");
  spec.t_max = get_number(j, "basin", "t_max", 200.0);
  if (!(spec.t_max > 0.0)) fail("basin.t_max", "must be positive");
  spec.before_after_control = get_bool(j, "basin", "before_after_control", false);
  return spec;
}

OutputSpec parse_output(const json& j) {
  check_keys(j, "output", {"path", "format"});
  OutputSpec spec;
  spec.path = get_string(j, "output", "path", std::string());
  const std::string fmt = get_string(j, "output", "format", std::string("csv"));
  if (fmt == "csv") spec.format = OutputSpec::Format::Csv;
  else if (fmt == "json") spec.format = OutputSpec::Format::Json;
  else fail("output.format", "expected 'csv' or 'json'");
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j, "<root>", {"model", "seed", "census", "control", "basin", "output"});
  ExperimentConfig cfg;
  if (!j.contains("model")) fail("<root>", "missing required key 'model'");
  cfg.model = parse_model(j["model"]);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      fail("seed", "expected a non-negative integer");
    const auto s = j["seed"].get<std::int64_t>();
    if (s < 0) fail("seed", "expected a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("census")) cfg.census = parse_census(j["census"]);
  if (j.contains("control")) cfg.control = parse_control(j["control"]);
  if (j.contains("basin")) cfg.basin = parse_basin(j["basin"]);
  if (j.contains("output")) cfg.output = parse_output(j["output"]);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ParamModel build_model(const ModelSpec& spec) {
  if (spec.name == "model1d") return make_model_1d(spec.x_ref);
  if (spec.name == "model2d") return make_model_2d(spec.nx, spec.ny);
  if (spec.name == "emt") return make_model_emt(emt_default_params(), spec.include_p);
  throw ConfigError("config: unknown model '" + spec.name + "'");
}

Vec initial_parameters(const ModelSpec& spec, const ParamModel& model) {
  Vec pi;
  if (spec.name == "model1d") {
    pi = Vec::Zero(1);
  } else if (spec.name == "model2d") {
    pi = model_2d_default_parameters();
  } else {
    pi = emt_default_parameters(spec.include_p);
  }
  for (const auto& [name, value] : spec.overrides) {
    bool found = false;
    for (int i = 0; i < model.param_dim; ++i) {
      if (model.param_names[i] == name) {
        pi[i] = value;
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("config: model.overrides: unknown parameter '" + name + "'");
  }
  return pi;
}

ControlConfig make_control_config(const ExperimentConfig& cfg) {
  if (!cfg.control) throw ConfigError("config: missing 'control' block");
  if (!cfg.census) throw ConfigError("config: control needs a 'census' block");
  ControlConfig cc;
  cc.epsilon = cfg.control->epsilon;
  cc.n_ite = cfg.control->n_ite;
  cc.cone = cfg.control->cone;
  cc.normalize_gradients = cfg.control->normalize_gradients;
  cc.complex_fatal = cfg.control->complex_fatal;
  cc.rescan_every = cfg.control->rescan_every;
  cc.census_box = cfg.census->box;
  cc.n_seeds = cfg.census->n_seeds;
  cc.rng_seed = cfg.seed;
  return cc;
}

}  // namespace basinctl
