#include "enkf/analysis.hpp"

#include <stdexcept>

namespace enkf {

AnalysisOperator::AnalysisOperator(const Eigen::MatrixXd& deviations,
                                   const ObservationMask& mask, double gamma, double alpha_sq)
    : d_(deviations), h_(mask.weights()), alpha_sq_(alpha_sq) {
  if (!(gamma > 0.0)) throw std::invalid_argument("analysis: gamma must be positive");
  if (!(alpha_sq >= 0.0)) throw std::invalid_argument("analysis: alpha_sq must be >= 0");
  if (mask.dim() != deviations.rows()) {
    throw std::invalid_argument("analysis: observation operator dimension mismatch");
  }
  inv_gamma_sq_ = 1.0 / (gamma * gamma);
  if (d_.cols() > d_.rows() && d_.cols() > 64) {
    dense_ = true;
    Eigen::MatrixXd m = (d_ * d_.transpose()) * h_.asDiagonal();
    m *= inv_gamma_sq_;
    m.diagonal().array() += 1.0 + alpha_sq * inv_gamma_sq_ * h_.array();
    full_.compute(m);
    return;
  }
  s_inv_ = (1.0 + alpha_sq * inv_gamma_sq_ * h_.array()).inverse().matrix();
  // I_K + V^T S^{-1} U = I_K + D^T H S^{-1} D / gamma^2; H S^{-1} is diagonal and
  // nonnegative, so the K x K matrix is symmetric positive definite.
  const Eigen::ArrayXd w = h_.array() * s_inv_.array() * inv_gamma_sq_;
  Eigen::MatrixXd small = d_.transpose() * (w.matrix().asDiagonal() * d_);
  small.diagonal().array() += 1.0;
  small_.compute(small);
  if (small_.info() != Eigen::Success) {
    throw std::runtime_error("analysis: reduced system factorization failed");
  }
}

Eigen::VectorXd AnalysisOperator::gain_apply(const Eigen::VectorXd& y) const {
  const Eigen::VectorXd hy = h_.cwiseProduct(y);
  return (alpha_sq_ * hy + d_ * (d_.transpose() * hy)) * inv_gamma_sq_;
}

Eigen::VectorXd AnalysisOperator::solve(const Eigen::VectorXd& rhs) const {
  if (dense_) return full_.solve(rhs);
  const Eigen::VectorXd sb = s_inv_.cwiseProduct(rhs);
  // V^T S^{-1} b = D^T H S^{-1} b / gamma
  const Eigen::VectorXd vt = d_.transpose() * h_.cwiseProduct(sb);
  const Eigen::VectorXd z = small_.solve(vt);
  // S^{-1} U z = S^{-1} D z / gamma; the two 1/gamma factors combine.
  return sb - s_inv_.cwiseProduct(d_ * z) * inv_gamma_sq_;
}

Eigen::VectorXd AnalysisOperator::update(const Eigen::VectorXd& prediction,
                                         const Eigen::VectorXd& y) const {
  return solve(prediction + gain_apply(y));
}

Ensemble predict(const Ensemble& ensemble, const Dynamics& model, double h) {
  std::vector<StateVector> next;
  next.reserve(ensemble.size());
  for (const auto& m : ensemble.members()) next.push_back(model.step(m, h));
  return Ensemble(std::move(next));
}

Ensemble analyze_with_observations(const Ensemble& prediction,
                                   const std::vector<StateVector>& perturbed,
                                   const AnalysisConfig& cfg) {
  if (perturbed.size() != prediction.size()) {
    throw std::invalid_argument("analyze: need one perturbed observation per member");
  }
  if (cfg.mask.kind() != prediction.kind()) {
    throw std::invalid_argument("analyze: observation operator kind does not match ensemble");
  }
  const AnalysisOperator op(prediction.deviations(), cfg.mask, cfg.gamma, cfg.alpha_sq);
  std::vector<StateVector> out;
  out.reserve(prediction.size());
  for (std::size_t k = 0; k < prediction.size(); ++k) {
    require_compatible(prediction.member(k), perturbed[k], "analyze");
    out.emplace_back(prediction.kind(), op.update(prediction.member(k).data, perturbed[k].data));
  }
  return Ensemble(std::move(out));
}

Ensemble analyze(const Ensemble& prediction, const StateVector& y, const AnalysisConfig& cfg,
                 std::uint64_t step_index, std::uint64_t master) {
  require_compatible(prediction.mean(), y, "analyze");
  std::vector<StateVector> perturbed;
  perturbed.reserve(prediction.size());
  for (std::size_t k = 0; k < prediction.size(); ++k) {
    perturbed.push_back(perturb_observation(y, cfg.gamma, k, step_index, master));
  }
  return analyze_with_observations(prediction, perturbed, cfg);
}

}  // namespace enkf
