// basinctl: census / control / basin / boolean experiments on multistable
// ODE models, configured by a JSON file, emitting CSV or JSON tables.

#include "basinctl/basin.hpp"
#include "basinctl/config.hpp"
#include "basinctl/control.hpp"
#include "basinctl/errors.hpp"
#include "basinctl/log.hpp"
#include "basinctl/models.hpp"
#include "basinctl/trace_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace basinctl;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitComputation = 3;
constexpr int kExitSelector = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::string format_override;
  std::optional<std::uint64_t> seed_override;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "experiment config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--out", args.out_override, "output path (overrides config)");
  cmd->add_option("--format", args.format_override, "csv or json (overrides config)")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", args.seed_override, "RNG seed (overrides config)");
  cmd->add_option("--threads", args.threads, "worker threads for basin sampling")
      ->check(CLI::PositiveNumber);
}

ExperimentConfig load(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args.config_path);
  if (!args.out_override.empty()) cfg.output.path = args.out_override;
  if (!args.format_override.empty())
    cfg.output.format = args.format_override == "json" ? OutputSpec::Format::Json
                                                        : OutputSpec::Format::Csv;
  if (args.seed_override) cfg.seed = *args.seed_override;
  return cfg;
}

void emit(const OutputSpec& out, const std::string& text) {
  if (out.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out.path, std::ios::binary);
  if (!f) throw Error("cannot open output file '" + out.path + "'");
  f << text;
}

EquilibriumCensus census_of(const ExperimentConfig& cfg, const ParamModel& model, const Vec& pi) {
  if (!cfg.census) throw ConfigError("config: this command needs a 'census' block");
  return find_equilibria(model, pi, cfg.census->box, cfg.census->n_seeds, cfg.seed);
}

int cmd_census(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const ParamModel model = build_model(cfg.model);
  const Vec pi = initial_parameters(cfg.model, model);
  const EquilibriumCensus census = census_of(cfg, model, pi);

  std::ostringstream os;
  if (cfg.output.format == OutputSpec::Format::Csv) write_census_csv(os, model, census);
  else os << census_to_json(model, census).dump(2) << "\n";
  emit(cfg.output, os.str());
  return kExitOk;
}

ControlTrace run_control_from_config(const ExperimentConfig& cfg, const ParamModel& model,
                                     const Vec& pi) {
  const ControlSpec& cs = *cfg.control;
  const ControlConfig cc = make_control_config(cfg);
  switch (cs.mode) {
    case ControlSpec::Mode::Eigenvalue:
      return run_eigenvalue_control(model, pi, cs.anchor, cs.eigen, cc);
    case ControlSpec::Mode::Saddle:
      return run_saddle_control(model, pi, cs.anchor, cs.saddles, cs.delta_g, cc);
    case ControlSpec::Mode::MultiObjective:
      return run_multiobjective_control(model, pi, cs.anchor, cs.eigen, cs.saddles, cs.delta_g,
                                        cc);
  }
  throw Error("unreachable control mode");
}

int cmd_control(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  if (!cfg.control) throw ConfigError("config: missing 'control' block");
  const ParamModel model = build_model(cfg.model);
  const Vec pi = initial_parameters(cfg.model, model);
  const ControlTrace trace = run_control_from_config(cfg, model, pi);

  std::ostringstream os;
  if (cfg.output.format == OutputSpec::Format::Csv) write_trace_csv(os, model, trace);
  else os << trace_to_json(model, trace).dump(2) << "\n";
  emit(cfg.output, os.str());
  return kExitOk;
}

int cmd_basin(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  if (!cfg.basin) throw ConfigError("config: missing 'basin' block");
  const ParamModel model = build_model(cfg.model);
  const Vec pi = initial_parameters(cfg.model, model);
  const BasinSpec& bs = *cfg.basin;

  std::vector<LabelledBasin> estimates;
  if (!bs.before_after_control) {
    const EquilibriumCensus census = census_of(cfg, model, pi);
    estimates.emplace_back("single", basin_fractions(model, pi, census, bs.box, bs.n_samples,
                                                     cfg.seed, bs.t_max, {}, args.threads));
  } else {
    if (!cfg.control) throw ConfigError("config: before/after mode needs a 'control' block");
    const EquilibriumCensus before = census_of(cfg, model, pi);
    estimates.emplace_back("before", basin_fractions(model, pi, before, bs.box, bs.n_samples,
                                                     cfg.seed, bs.t_max, {}, args.threads));
    const ControlTrace trace = run_control_from_config(cfg, model, pi);
    const Vec pi_after = trace.final_pi();
    const EquilibriumCensus after =
        find_equilibria(model, pi_after, cfg.census->box, cfg.census->n_seeds, cfg.seed);
    estimates.emplace_back("after", basin_fractions(model, pi_after, after, bs.box, bs.n_samples,
                                                    cfg.seed, bs.t_max, {}, args.threads));
  }

  std::ostringstream os;
  if (cfg.output.format == OutputSpec::Format::Csv) write_basin_csv(os, model, estimates);
  else os << basin_to_json(model, estimates).dump(2) << "\n";
  emit(cfg.output, os.str());
  return kExitOk;
}

int cmd_boolean(const CommonArgs& args) {
  OutputSpec out;
  if (!args.config_path.empty()) {
    const ExperimentConfig cfg = load(args);
    out = cfg.output;
  } else {
    if (!args.out_override.empty()) out.path = args.out_override;
    if (args.format_override == "json") out.format = OutputSpec::Format::Json;
  }
  std::ostringstream os;
  if (out.format == OutputSpec::Format::Csv) write_boolean_csv(os);
  else os << boolean_to_json().dump(2) << "\n";
  emit(out, os.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"basin-of-attraction control experiments"};
  app.require_subcommand(1);

  CommonArgs census_args, control_args, basin_args, boolean_args;
  auto* census = app.add_subcommand("census", "locate and classify equilibria");
  add_common(census, census_args);
  auto* control = app.add_subcommand("control", "run a parameter control experiment");
  add_common(control, control_args);
  auto* basin = app.add_subcommand("basin", "Monte Carlo basin fractions");
  add_common(basin, basin_args);
  auto* boolean = app.add_subcommand("boolean", "boolean attractor report");
  add_common(boolean, boolean_args, /*config_required=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (census->parsed()) return cmd_census(census_args);
    if (control->parsed()) return cmd_control(control_args);
    if (basin->parsed()) return cmd_basin(basin_args);
    if (boolean->parsed()) return cmd_boolean(boolean_args);
  } catch (const ConfigError& e) {
    basinctl::log::error(e.what());
    return kExitConfig;
  } catch (const SelectorError& e) {
    basinctl::log::error(e.what());
    return kExitSelector;
  } catch (const Error& e) {
    basinctl::log::error(e.what());
    return kExitComputation;
  } catch (const std::exception& e) {
    basinctl::log::error("unexpected: ", e.what());
    return kExitComputation;
  }
  return kExitConfig;
}
