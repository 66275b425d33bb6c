#pragma once

#include "basinctl/control.hpp"
#include "basinctl/model.hpp"
#include "basinctl/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace basinctl {

/// Experiment configuration parsed from a JSON file. Validation is strict:
/// unknown keys anywhere are rejected before any computation starts.
struct ModelSpec {
  std::string name;             // model1d | model2d | emt
  double x_ref = 1.0;           // model1d
  int nx = 3, ny = 5;           // model2d
  bool include_p = false;       // emt
  std::map<std::string, double> overrides; // by parameter name
};

struct CensusSpec {
  Box box;
  int n_seeds = 200;
};

struct ControlSpec {
  enum class Mode { Eigenvalue, Saddle, MultiObjective };
  Mode mode = Mode::Eigenvalue;
  double epsilon = 1e-2;
  int n_ite = 1000;
  Vec anchor;
  EigenTargetSpec eigen;
  SaddleSelection saddles;
  bool saddles_given = false;
  double delta_g = 0.0;
  AffineConeSpec cone;
  bool normalize_gradients = true;
  bool complex_fatal = false;
  int rescan_every = 50;
};

struct BasinSpec {
  Box box;
  int n_samples = 10000;
  double t_max = 200.0;
  bool before_after_control = false;
};

struct OutputSpec {
  std::string path;
  enum class Format { Csv, Json };
  Format format = Format::Csv;
};

struct ExperimentConfig {
  ModelSpec model;
  std::uint64_t seed = 1;
  std::optional<CensusSpec> census;
  std::optional<ControlSpec> control;
  std::optional<BasinSpec> basin;
  OutputSpec output;
};

/// Parse + validate; throws ConfigError with a path-qualified message.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

ParamModel build_model(const ModelSpec& spec);

/// Model defaults with the spec's overrides applied.
Vec initial_parameters(const ModelSpec& spec, const ParamModel& model);

/// ControlConfig assembled from the config blocks.
ControlConfig make_control_config(const ExperimentConfig& cfg);

}  // namespace basinctl
