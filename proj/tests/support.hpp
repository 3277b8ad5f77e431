#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "enkf/dynamics.hpp"
#include "enkf/ensemble.hpp"
#include "enkf/gaussian_field.hpp"
#include "enkf/navier_stokes.hpp"
#include "enkf/rng.hpp"

namespace testing {

inline std::shared_ptr<const enkf::Dynamics> model(enkf::ModelKind kind) {
  return enkf::make_dynamics(enkf::ModelSpec::defaults(kind));
}

inline std::shared_ptr<const enkf::Dynamics> linear_model(int dim, double rate) {
  auto spec = enkf::ModelSpec::defaults(enkf::ModelKind::linear);
  spec.linear.dim = dim;
  spec.linear.rate = rate;
  return enkf::make_dynamics(spec);
}

inline std::shared_ptr<const enkf::NavierStokes2D> nse(bool nonlinear = true, double f_amp = 10.0,
                                                        int grid = 32, double dt = 0.005) {
  auto spec = enkf::ModelSpec::defaults(enkf::ModelKind::nse2d);
  spec.nse.nonlinear = nonlinear;
  spec.nse.f_amp = f_amp;
  spec.nse.grid = grid;
  spec.dt_internal = dt;
  return std::make_shared<enkf::NavierStokes2D>(spec);
}

inline enkf::StateVector random_state(enkf::ModelKind kind, Eigen::Index dim, enkf::RngStream& rng,
                                      double sigma = 1.0) {
  return {kind, sigma * rng.normal_vector(dim)};
}

inline enkf::StateVector random_nse_state(const enkf::SpectralLayout& layout, enkf::RngStream& rng,
                                          double sigma = 1.0) {
  return enkf::sample_gaussian_field(enkf::GaussianFieldLaw::white(sigma), layout, rng);
}

inline enkf::Ensemble random_ensemble(enkf::ModelKind kind, Eigen::Index dim, int K,
                                      enkf::RngStream& rng, double sigma = 1.0) {
  std::vector<enkf::StateVector> members;
  for (int k = 0; k < K; ++k) members.push_back(random_state(kind, dim, rng, sigma));
  return enkf::Ensemble(std::move(members));
}

inline Eigen::MatrixXd dense_covariance(const enkf::Ensemble& e) {
  const Eigen::Index n = e.dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (const auto& m : e.members()) mean += m.data;
  mean /= static_cast<double>(e.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (const auto& m : e.members()) c += (m.data - mean) * (m.data - mean).transpose();
  return c / static_cast<double>(e.size());
}

inline double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline double sample_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd x = a.array() - a.mean();
  const Eigen::VectorXd y = b.array() - b.mean();
  return x.dot(y) / (x.norm() * y.norm());
}

}  // namespace testing
