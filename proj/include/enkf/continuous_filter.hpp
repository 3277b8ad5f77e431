#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "enkf/discrete_filter.hpp"

namespace enkf {

struct ContinuousConfig {
  double dt = 0.005;
  double gamma = 0.01;
  double alpha_sq = 0.0;
  ObservationMask mask;
  double T = 1.0;
  /// Apply alpha^2 I in the noise term as well as the drift.
  bool inflate_noise = true;
  /// Record every `record_stride` substeps (and the final one).
  int record_stride = 20;
  std::uint64_t seed = 1;
  SeriesOptions series;

  /// round(T / dt); throws std::invalid_argument unless T is a multiple of dt.
  long substeps() const;
};

/// Brownian increments over one substep, already scaled by sqrt(dt).
struct NoiseIncrements {
  std::vector<Eigen::VectorXd> member;  // dW^(k)
  Eigen::VectorXd shared;               // dB
};

/// Euler-Maruyama step of
///   dv^(k) = -(1/gamma^2)(alpha^2 I + C) H (v^(k) - u) dt
///            + (1/gamma)(alpha_n^2 I + C) H (dW^(k) + dB)
/// with C = C(v) frozen at the start; alpha_n^2 is alpha^2 if
/// `inflate_noise` and 0 otherwise.
Ensemble nudge_noise_update(const Ensemble& ensemble, const StateVector& u_true, double dt,
                            double gamma, double alpha_sq, const ObservationMask& mask,
                            bool inflate_noise, const NoiseIncrements& noise);

/// Same, drawing dW^(k) from (MemberNoise, k, step) and dB from
/// (SharedNoise, 0, step).
Ensemble nudge_noise_substep(const Ensemble& ensemble, const StateVector& u_true,
                             const ContinuousConfig& cfg, std::uint64_t step_index,
                             std::uint64_t master);

NoiseIncrements draw_increments(std::size_t members, Eigen::Index dim, double dt,
                                std::uint64_t step_index, std::uint64_t master);

/// Split-step filter: each substep advances the truth and every member by
/// Psi_dt and then applies nudge_noise_substep against the new truth.
FilterRun run_continuous_filter(const Dynamics& model, const ContinuousConfig& cfg,
                                const StateVector& u0, const Ensemble& initial);
FilterRun run_continuous_filter(const Dynamics& model, const ContinuousConfig& cfg,
                                const StateVector& u0, const EnsembleInit& init,
                                int ensemble_size);

/// Discrete filter with Gamma = gamma0^2 / h against the split-step SDE at
/// a fixed fine step, both driven by the same Brownian paths.
struct ConvergenceConfig {
  std::vector<double> h_list{0.02, 0.01, 0.005, 0.0025};
  double gamma0 = 0.5;
  double alpha_sq = 0.0;
  double T = 1.0;
  int n_mc = 100;
  int ensemble_size = 10;
  /// Reference step = min(h_list) / refine.
  int refine = 4;
  double spin_up = 10.0;
  EnsembleInit init = EnsembleInit::white(1.0, 0.5);
  std::uint64_t seed = 1;
};

struct ConvergenceRow {
  double h = 0.0;
  double msd = 0.0;      // E (1/K) sum_k |v_disc^(k)(T) - v_cts^(k)(T)|^2
  double std_err = 0.0;  // standard error of msd over replicas
};

std::vector<ConvergenceRow> convergence_experiment(const Dynamics& model,
                                                   const ConvergenceConfig& cfg);

/// Throws std::invalid_argument unless h_list is strictly decreasing, every
/// h is a multiple of the reference step and T a multiple of every h.
void validate_convergence_config(const ConvergenceConfig& cfg);

}  // namespace enkf
