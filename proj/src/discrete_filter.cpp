#include "enkf/discrete_filter.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace enkf {

EnsembleInit EnsembleInit::defaults(const Dynamics& model, double beta) {
  if (model.kind() == ModelKind::nse2d) {
    const auto& p = model.spec().nse;
    const double c = beta * 4.0 * std::numbers::pi * std::numbers::pi * p.nu / (p.length * p.length);
    return {GaussianFieldLaw::inverse_stokes(c, p.nu),
            GaussianFieldLaw::inverse_stokes(c / 25.0, p.nu)};
  }
  return white(1.0, 0.5);
}

StateVector sample_state(const GaussianFieldLaw& law, const Dynamics& model, RngStream& rng) {
  if (const SpectralLayout* layout = model.layout()) {
    return sample_gaussian_field(law, *layout, rng);
  }
  return sample_gaussian_field(law, model.kind(), model.dim(), rng);
}

StateVector draw_truth_initial(const Dynamics& model, double spin_up, std::uint64_t master) {
  if (spin_up < 0.0) throw std::invalid_argument("spin_up must be >= 0");
  RngStream rng(master, Purpose::TruthInit);
  const GaussianFieldLaw law = model.kind() == ModelKind::nse2d
                                   ? GaussianFieldLaw::inverse_stokes_sq(model.spec().nse.nu)
                                   : GaussianFieldLaw::white(1.0);
  StateVector u = sample_state(law, model, rng);
  if (spin_up > 0.0) u = model.step(u, spin_up);
  return u;
}

Ensemble draw_initial_ensemble(const Dynamics& model, const EnsembleInit& init,
                               const StateVector& u0, int ensemble_size, std::uint64_t master) {
  if (ensemble_size < 1) throw std::invalid_argument("ensemble size must be >= 1");
  require_compatible(u0, model.zero_state(), "draw_initial_ensemble");
  RngStream mean_rng(master, Purpose::EnsembleMean);
  const StateVector m0 = u0 + sample_state(init.mean_law, model, mean_rng);
  std::vector<StateVector> members;
  members.reserve(static_cast<std::size_t>(ensemble_size));
  for (int k = 0; k < ensemble_size; ++k) {
    RngStream rng(master, Purpose::EnsembleMember, static_cast<std::uint64_t>(k));
    members.push_back(m0 + sample_state(init.member_law, model, rng));
  }
  return Ensemble(std::move(members));
}

void validate_filter_inputs(const Dynamics& model, const FilterConfig& cfg,
                            const TruthRun& truth, const Ensemble& initial) {
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("filter: gamma must be positive");
  if (!(cfg.alpha_sq >= 0.0)) throw std::invalid_argument("filter: alpha_sq must be >= 0");
  if (truth.states.empty() || truth.observations.size() + 1 != truth.states.size()) {
    throw std::invalid_argument("filter: truth run needs one more state than observations");
  }
  if (!(truth.h > 0.0)) throw std::invalid_argument("filter: truth observation interval must be positive");
  if (std::abs(truth.gamma - cfg.gamma) > 1e-12 * cfg.gamma) {
    throw std::invalid_argument("filter: config gamma does not match the truth run");
  }
  if (cfg.mask.kind() != model.kind() || cfg.mask.dim() != model.dim()) {
    throw std::invalid_argument("filter: observation operator does not match the model");
  }
  if (truth.mask.dim() != 0 && truth.mask.weights() != cfg.mask.weights()) {
    throw std::invalid_argument("filter: observation operator differs from the truth run");
  }
  require_compatible(truth.states.front(), model.zero_state(), "filter truth");
  require_compatible(initial.mean(), model.zero_state(), "filter ensemble");
  if (cfg.ensemble_size > 0 && static_cast<int>(initial.size()) != cfg.ensemble_size) {
    throw std::invalid_argument("filter: initial ensemble size differs from config");
  }
}

FilterRun run_discrete_filter(const Dynamics& model, const FilterConfig& cfg,
                              const TruthRun& truth, const Ensemble& initial) {
  validate_filter_inputs(model, cfg, truth, initial);
  const AnalysisConfig acfg{cfg.gamma, cfg.alpha_sq, cfg.mask};
  FilterRun run{ErrorSeries{}, initial, cfg.seed};
  run.series.record(0, 0, 0.0, initial, truth.states.front(), model, cfg.series);
  for (std::size_t j = 1; j < truth.states.size(); ++j) {
    const Ensemble pred = predict(run.final_ensemble, model, truth.h);
    run.final_ensemble = analyze(pred, truth.observations[j - 1], acfg, j, cfg.seed);
    run.series.record(static_cast<long>(j), static_cast<long>(j) * truth.steps_per_observation,
                      static_cast<double>(j) * truth.h, run.final_ensemble, truth.states[j],
                      model, cfg.series);
  }
  return run;
}

FilterRun run_discrete_filter(const Dynamics& model, const FilterConfig& cfg,
                              const TruthRun& truth, const EnsembleInit& init) {
  if (truth.states.empty()) throw std::invalid_argument("filter: empty truth run");
  return run_discrete_filter(
      model, cfg, truth,
      draw_initial_ensemble(model, init, truth.states.front(), cfg.ensemble_size, cfg.seed));
}

}  // namespace enkf
