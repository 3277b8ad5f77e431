#pragma once

#include <cstdint>
#include <optional>

#include "enkf/analysis.hpp"
#include "enkf/dynamics.hpp"
#include "enkf/ensemble.hpp"
#include "enkf/error_series.hpp"
#include "enkf/gaussian_field.hpp"
#include "enkf/observation.hpp"

namespace enkf {

/// Initial ensemble law: m0 ~ N(u0, mean_law), v0^(k) ~ N(m0, member_law).
struct EnsembleInit {
  GaussianFieldLaw mean_law;
  GaussianFieldLaw member_law;

  /// nse2d: c A^{-1} and (c/25) A^{-1} with c = beta 4 pi^2 nu / L^2;
  /// other models: white laws with sigmas 1 and 0.5.
  static EnsembleInit defaults(const Dynamics& model, double beta = 0.25);
  static EnsembleInit white(double mean_sigma, double member_sigma) {
    return {GaussianFieldLaw::white(mean_sigma), GaussianFieldLaw::white(member_sigma)};
  }
};

StateVector sample_state(const GaussianFieldLaw& law, const Dynamics& model, RngStream& rng);

/// Truth initial condition from the (TruthInit) substream: N(0, nu^2 A^{-2})
/// for nse2d, N(0, I) otherwise, then advanced by Psi_{spin_up}.
StateVector draw_truth_initial(const Dynamics& model, double spin_up, std::uint64_t master);

/// Draws from the (EnsembleMean) and (EnsembleMember, k) substreams of `master`.
Ensemble draw_initial_ensemble(const Dynamics& model, const EnsembleInit& init,
                               const StateVector& u0, int ensemble_size, std::uint64_t master);

struct FilterConfig {
  int ensemble_size = 20;
  double gamma = 0.01;
  double alpha_sq = 0.0;
  ObservationMask mask;
  std::uint64_t seed = 1;
  SeriesOptions series;
};

struct FilterRun {
  ErrorSeries series;
  Ensemble final_ensemble;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument if cfg and truth disagree on gamma, H or
/// dimensions, or the ensemble does not match.
void validate_filter_inputs(const Dynamics& model, const FilterConfig& cfg,
                            const TruthRun& truth, const Ensemble& initial);

/// Predict / analyze for every observation in `truth`, recording the
/// initial state (step 0) and each analysis.
FilterRun run_discrete_filter(const Dynamics& model, const FilterConfig& cfg,
                              const TruthRun& truth, const Ensemble& initial);
FilterRun run_discrete_filter(const Dynamics& model, const FilterConfig& cfg,
                              const TruthRun& truth, const EnsembleInit& init);

}  // namespace enkf
