#pragma once

#include <vector>

#include <Eigen/Dense>

#include "enkf/state.hpp"

namespace enkf {

/// K members plus cached mean and deviation factor.
///
/// The deviation matrix D (dim x K) has columns d_k = (v_k - mean)/sqrt(K),
/// so the empirical covariance C = (1/K) sum_k (v_k - mean)(v_k - mean)^T
/// equals D D^T. C is never formed; use covariance_apply.
class Ensemble {
 public:
  explicit Ensemble(std::vector<StateVector> members);

  std::size_t size() const { return members_.size(); }
  Eigen::Index dim() const { return mean_.dim(); }
  ModelKind kind() const { return mean_.kind; }

  const std::vector<StateVector>& members() const { return members_; }
  const StateVector& member(std::size_t k) const { return members_[k]; }
  const StateVector& mean() const { return mean_; }
  const Eigen::MatrixXd& deviations() const { return deviations_; }

  /// C w, computed as D (D^T w).
  StateVector covariance_apply(const StateVector& w) const;

  /// sqrt(tr C).
  double spread() const { return deviations_.norm(); }

 private:
  std::vector<StateVector> members_;
  StateVector mean_;
  Eigen::MatrixXd deviations_;
};

StateVector ensemble_mean(const Ensemble& ensemble);
StateVector covariance_apply(const Ensemble& ensemble, const StateVector& w);

}  // namespace enkf
