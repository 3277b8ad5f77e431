#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "enkf/dynamics.hpp"
#include "enkf/state.hpp"

namespace enkf {

/// Spectral mask observation operators.
///
/// Ring kinds keep (p_inside) or remove (q_outside) the modes with
/// |2 pi m|^2 < lambda L^2, lambda = pi^2 |k_lambda|^2. With `inclusive`
/// the inequality becomes <=.
struct ObservationOperator {
  enum class Kind { identity, p_inside, q_outside, zero };

  Kind kind = Kind::identity;
  int ring_radius = 5;
  bool inclusive = false;

  static ObservationOperator identity() { return {Kind::identity, 0, false}; }
  static ObservationOperator zero() { return {Kind::zero, 0, false}; }
  static ObservationOperator inside(int radius, bool inclusive = false) {
    return {Kind::p_inside, radius, inclusive};
  }
  static ObservationOperator outside(int radius, bool inclusive = false) {
    return {Kind::q_outside, radius, inclusive};
  }
};

std::string_view to_string(ObservationOperator::Kind kind);
ObservationOperator::Kind parse_observation_kind(std::string_view name);

/// An observation operator bound to a state space: a 0/1 weight per real
/// component. H = H^T = H^2 = diag(weights).
class ObservationMask {
 public:
  ObservationMask() = default;
  ObservationMask(ModelKind kind, Eigen::VectorXd weights)
      : kind_(kind), weights_(std::move(weights)) {}

  ModelKind kind() const { return kind_; }
  Eigen::Index dim() const { return weights_.size(); }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::Index observed_count() const;
  bool is_identity() const;

  StateVector apply(const StateVector& u) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return weights_.cwiseProduct(u); }

 private:
  ModelKind kind_ = ModelKind::linear;
  Eigen::VectorXd weights_;
};

/// Throws std::invalid_argument for ring kinds on non-spectral models.
ObservationMask bind_observation(const ObservationOperator& op, const Dynamics& model);
ObservationMask bind_observation(const ObservationOperator& op, ModelKind kind,
                                 Eigen::Index dim, const SpectralLayout* layout);

StateVector apply_observation(const ObservationMask& mask, const StateVector& u);

/// Truth trajectory u_0 .. u_n at observation times and y_1 .. y_n.
struct TruthRun {
  std::vector<StateVector> states;
  std::vector<StateVector> observations;  // observations[j] observes states[j + 1]
  double h = 0.0;
  int steps_per_observation = 1;
  double gamma = 0.0;
  ObservationMask mask;
};

/// y_j = H u_j + gamma xi_j with xi_j white in every real component, drawn
/// from the (ObservationNoise, step j) substream of `seed`.
TruthRun generate_truth(const Dynamics& model, const ObservationMask& mask,
                        const StateVector& u0, double h, int n_obs, double gamma,
                        std::uint64_t seed);

/// y + gamma xi with xi from the (PerturbedObservation, member, step)
/// substream of `master`.
StateVector perturb_observation(const StateVector& y, double gamma, std::uint64_t member_index,
                                std::uint64_t step_index, std::uint64_t master);

}  // namespace enkf
