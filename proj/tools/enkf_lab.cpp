#include <CLI11.hpp>

#include <iostream>

#include "enkf/errors.hpp"
#include "enkf/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kIoError = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;

const char* describe(enkf::Command c) {
  switch (c) {
    case enkf::Command::truth_gen: return "Generate a truth trajectory and noisy observations";
    case enkf::Command::run_discrete: return "Run the discrete-time EnKF against a truth";
    case enkf::Command::run_continuous: return "Run the continuous-time EnKF";
    case enkf::Command::check_disc: return "Monte Carlo check of the discrete filter error bound";
    case enkf::Command::check_varinf: return "Check the variance-inflated discrete bound";
    case enkf::Command::check_cts: return "Check the continuous filter error bound";
    case enkf::Command::converge_limit: return "Discrete-to-continuous convergence experiment";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble Kalman filter experiments", "enkf-lab"};
  app.set_version_flag("--version", ENKF_VERSION);
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  app.footer("Any config key may be overridden with --key=value.");

  const enkf::Command commands[] = {
      enkf::Command::truth_gen,    enkf::Command::run_discrete, enkf::Command::run_continuous,
      enkf::Command::check_disc,   enkf::Command::check_varinf, enkf::Command::check_cts,
      enkf::Command::converge_limit,
  };
  for (auto c : commands) {
    auto* sub = app.add_subcommand(std::string(enkf::to_string(c)), describe(c));
    sub->allow_extras();
    sub->add_option("-c,--config", config_path, "key = value config file")
        ->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    const enkf::Command command = enkf::parse_command(sub->get_name());
    enkf::Config cfg = config_path.empty() ? enkf::Config{} : enkf::Config::from_file(config_path);
    cfg.apply_overrides(sub->remaining());
    const enkf::ExperimentConfig ex = enkf::resolve_experiment(command, cfg);
    const enkf::ExperimentResult result = enkf::run_experiment(ex);
    for (const auto& path : enkf::write_outputs(ex, result)) std::cout << "wrote " << path << '\n';
    std::cout << result.summary << '\n';
    return kOk;
  } catch (const enkf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const enkf::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
}
