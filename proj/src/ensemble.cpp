#include "enkf/ensemble.hpp"

#include <cmath>
#include <stdexcept>

namespace enkf {

Ensemble::Ensemble(std::vector<StateVector> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("Ensemble: no members");
  const StateVector& first = members_.front();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(first.dim());
  for (const auto& m : members_) {
    require_compatible(first, m, "Ensemble");
    sum += m.data;
  }
  const double k = static_cast<double>(members_.size());
  mean_ = StateVector(first.kind, sum / k);
  deviations_.resize(first.dim(), static_cast<Eigen::Index>(members_.size()));
  const double scale = 1.0 / std::sqrt(k);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    deviations_.col(static_cast<Eigen::Index>(i)) = (members_[i].data - mean_.data) * scale;
  }
}

StateVector Ensemble::covariance_apply(const StateVector& w) const {
  require_compatible(mean_, w, "covariance_apply");
  return {mean_.kind, deviations_ * (deviations_.transpose() * w.data)};
}

StateVector ensemble_mean(const Ensemble& ensemble) { return ensemble.mean(); }

StateVector covariance_apply(const Ensemble& ensemble, const StateVector& w) {
  return ensemble.covariance_apply(w);
}

}  // namespace enkf
