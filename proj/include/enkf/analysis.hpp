#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "enkf/dynamics.hpp"
#include "enkf/ensemble.hpp"
#include "enkf/observation.hpp"

namespace enkf {

struct AnalysisConfig {
  double gamma = 0.01;    // observation noise std, Gamma = gamma^2 I
  double alpha_sq = 0.0;  // additive inflation alpha^2 I
  ObservationMask mask;
};

/// Solver for the perturbed-observation update
///
///   (I + (alpha^2 I + D D^T) H^T H / gamma^2) v = vhat + (alpha^2 I + D D^T) H^T y / gamma^2
///
/// with H a 0/1 spectral mask. The system matrix is S + U V^T with S diagonal,
/// U = D / gamma and V = H D / gamma, so the Woodbury identity reduces every
/// solve to a K x K symmetric positive definite system. For large K exceeding
/// the state dimension the dim x dim system is factored directly instead.
class AnalysisOperator {
 public:
  AnalysisOperator(const Eigen::MatrixXd& deviations, const ObservationMask& mask, double gamma,
                   double alpha_sq);

  /// (alpha^2 I + D D^T) H^T y / gamma^2.
  Eigen::VectorXd gain_apply(const Eigen::VectorXd& y) const;
  /// Applies the inverse of the system matrix.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  /// Analysis member from its prediction and its perturbed observation.
  Eigen::VectorXd update(const Eigen::VectorXd& prediction, const Eigen::VectorXd& y) const;

 private:
  Eigen::MatrixXd d_;
  Eigen::VectorXd h_;
  double inv_gamma_sq_;
  double alpha_sq_;
  Eigen::VectorXd s_inv_;
  Eigen::LDLT<Eigen::MatrixXd> small_;
  bool dense_ = false;
  Eigen::PartialPivLU<Eigen::MatrixXd> full_;
};

/// Advances every member by Psi_h.
Ensemble predict(const Ensemble& ensemble, const Dynamics& model, double h);

/// Perturbs y for each member from the (PerturbedObservation, k, step)
/// substreams and applies the update to the prediction ensemble.
Ensemble analyze(const Ensemble& prediction, const StateVector& y, const AnalysisConfig& cfg,
                 std::uint64_t step_index, std::uint64_t master);

/// Same update with caller-supplied perturbed observations, one per member.
Ensemble analyze_with_observations(const Ensemble& prediction,
                                   const std::vector<StateVector>& perturbed,
                                   const AnalysisConfig& cfg);

}  // namespace enkf
