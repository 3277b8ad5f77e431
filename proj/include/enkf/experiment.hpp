#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "enkf/config.hpp"
#include "enkf/continuous_filter.hpp"
#include "enkf/diagnostics.hpp"
#include "enkf/discrete_filter.hpp"

namespace enkf {

enum class Command {
  truth_gen,
  run_discrete,
  run_continuous,
  check_disc,
  check_varinf,
  check_cts,
  converge_limit,
};

std::string_view to_string(Command c);
Command parse_command(std::string_view name);

/// Every key accepted in a config file or as --key=value.
const std::set<std::string>& known_config_keys();

/// Fully resolved experiment settings. Defaults depend on the command.
struct ExperimentConfig {
  Command command = Command::run_discrete;
  Config source;

  ModelSpec model;
  ObservationOperator observation;
  std::string filter_kind;  // "discrete" or "continuous"

  int ensemble_size = 20;
  int obs_interval_steps = 20;  // J; h = J dt for nse2d
  double h = 0.1;
  double gamma = 0.01;
  double alpha_sq = 0.0;
  int n_obs = 400;
  double T = 40.0;
  int record_stride = 20;
  bool inflate_noise = true;
  std::uint64_t seed = 1;
  double spin_up = 20.0;
  double init_beta = 0.25;
  double init_mean_sigma = 1.0;
  double init_member_sigma = 0.5;
  SeriesOptions series;

  std::string output_dir = ".";
  std::string truth_file;

  TheoremParams theorem;
  ConvergenceConfig convergence;

  EnsembleInit ensemble_init(const Dynamics& model) const;
};

/// Resolves defaults and validates; throws ConfigError, citing the origin
/// of the offending entry, for unknown keys or invalid values.
ExperimentConfig resolve_experiment(Command command, const Config& cfg);

struct ExperimentResult {
  /// Output file name -> contents, written only after the run succeeded.
  std::map<std::string, std::string> files;
  /// One-line outcome for the console.
  std::string summary;
  /// False when a theorem check or the convergence criterion did not hold.
  bool criterion_met = true;
};

/// Runs the experiment in memory. Throws NumericalFailure on NaN/blow-up.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes `result.files` below cfg.output_dir (creating it), staging to
/// temporary names first so that nothing partial is left on failure.
std::vector<std::string> write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result);

}  // namespace enkf
