#include "enkf/observation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace enkf {

std::string_view to_string(ObservationOperator::Kind kind) {
  using K = ObservationOperator::Kind;
  switch (kind) {
    case K::identity: return "identity";
    case K::p_inside: return "p_inside";
    case K::q_outside: return "q_outside";
    case K::zero: return "zero";
  }
  return "unknown";
}

ObservationOperator::Kind parse_observation_kind(std::string_view name) {
  using K = ObservationOperator::Kind;
  if (name == "identity" || name == "full") return K::identity;
  if (name == "p_inside" || name == "inside") return K::p_inside;
  if (name == "q_outside" || name == "outside") return K::q_outside;
  if (name == "zero" || name == "none") return K::zero;
  throw std::invalid_argument("unknown observation operator '" + std::string(name) + "'");
}

Eigen::Index ObservationMask::observed_count() const {
  return static_cast<Eigen::Index>((weights_.array() > 0.5).count());
}

bool ObservationMask::is_identity() const { return observed_count() == dim(); }

StateVector ObservationMask::apply(const StateVector& u) const {
  if (u.kind != kind_ || u.dim() != dim()) {
    throw std::invalid_argument("apply_observation: state does not match operator");
  }
  return {u.kind, weights_.cwiseProduct(u.data)};
}

ObservationMask bind_observation(const ObservationOperator& op, ModelKind kind,
                                 Eigen::Index dim, const SpectralLayout* layout) {
  using K = ObservationOperator::Kind;
  switch (op.kind) {
    case K::identity: return {kind, Eigen::VectorXd::Ones(dim)};
    case K::zero: return {kind, Eigen::VectorXd::Zero(dim)};
    case K::p_inside:
    case K::q_outside: break;
  }
  if (kind != ModelKind::nse2d || layout == nullptr) {
    throw std::invalid_argument("ring observation operators require an nse2d state, got " +
                                std::string(to_string(kind)));
  }
  if (op.ring_radius < 0) throw std::invalid_argument("ring radius must be >= 0");
  // |2 pi m|^2 < lambda L^2 with lambda = pi^2 k^2  <=>  4 |m|^2 < k^2 L^2.
  const double lhs_scale = 4.0;
  const double bound = static_cast<double>(op.ring_radius) * op.ring_radius *
                       layout->domain_length() * layout->domain_length();
  Eigen::VectorXd w(dim);
  for (std::size_t i = 0; i < layout->num_modes(); ++i) {
    const double lhs = lhs_scale * layout->mode(i).norm_sq();
    const double tol = 1e-12 * bound;
    const bool inside = op.inclusive ? lhs <= bound + tol : lhs < bound - tol;
    const bool keep = op.kind == K::p_inside ? inside : !inside;
    w[static_cast<Eigen::Index>(2 * i)] = keep ? 1.0 : 0.0;
    w[static_cast<Eigen::Index>(2 * i + 1)] = keep ? 1.0 : 0.0;
  }
  return {kind, std::move(w)};
}

ObservationMask bind_observation(const ObservationOperator& op, const Dynamics& model) {
  return bind_observation(op, model.kind(), model.dim(), model.layout());
}

StateVector apply_observation(const ObservationMask& mask, const StateVector& u) {
  return mask.apply(u);
}

TruthRun generate_truth(const Dynamics& model, const ObservationMask& mask,
                        const StateVector& u0, double h, int n_obs, double gamma,
                        std::uint64_t seed) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("generate_truth: gamma must be >= 0");
  if (n_obs < 1) throw std::invalid_argument("generate_truth: n_obs must be >= 1");
  if (mask.kind() != model.kind() || mask.dim() != model.dim()) {
    throw std::invalid_argument("generate_truth: observation operator does not match model");
  }
  TruthRun run;
  run.h = h;
  run.gamma = gamma;
  run.mask = mask;
  run.steps_per_observation =
      std::max(1, static_cast<int>(std::lround(h / model.spec().dt_internal)));
  run.states.reserve(static_cast<std::size_t>(n_obs) + 1);
  run.observations.reserve(static_cast<std::size_t>(n_obs));
  run.states.push_back(u0);
  for (int j = 1; j <= n_obs; ++j) {
    run.states.push_back(model.step(run.states.back(), h));
    RngStream noise(seed, Purpose::ObservationNoise, 0, static_cast<std::uint64_t>(j));
    StateVector y = mask.apply(run.states.back());
    if (gamma > 0.0) y.data += gamma * noise.normal_vector(y.dim());
    run.observations.push_back(std::move(y));
  }
  return run;
}

StateVector perturb_observation(const StateVector& y, double gamma, std::uint64_t member_index,
                                std::uint64_t step_index, std::uint64_t master) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("perturb_observation: gamma must be >= 0");
  if (gamma == 0.0) return y;
  RngStream rng(master, Purpose::PerturbedObservation, member_index, step_index);
  return {y.kind, y.data + gamma * rng.normal_vector(y.dim())};
}

}  // namespace enkf
