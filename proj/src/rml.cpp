#include "enkf/rml.hpp"

#include <stdexcept>

namespace enkf {

std::vector<Eigen::VectorXd> rml_sample(const RmlProblem& problem, int n_samples,
                                        RngStream& rng) {
  const Eigen::Index n = problem.prior_mean.size();
  const Eigen::MatrixXd& f = problem.prior_factor;
  const Eigen::MatrixXd& g = problem.forward;
  if (f.rows() != n || f.cols() != n) {
    throw std::invalid_argument("rml_sample: prior factor must be square with the state dimension");
  }
  if (g.cols() != n || g.rows() != problem.data.size()) {
    throw std::invalid_argument("rml_sample: forward operator shape mismatch");
  }
  if (!(problem.gamma > 0.0)) throw std::invalid_argument("rml_sample: gamma must be positive");
  if (n_samples < 0) throw std::invalid_argument("rml_sample: n_samples must be >= 0");

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(f);
  if (lu.rank() < n) throw std::invalid_argument("rml_sample: prior covariance is singular");

  // The minimizer in gain form: u = u_hat + C_hat G^T (G C_hat G^T + Gamma)^{-1}
  // (y + gamma xi - G u_hat).
  const Eigen::MatrixXd c_hat = f * f.transpose();
  const Eigen::MatrixXd cg = c_hat * g.transpose();
  Eigen::MatrixXd innov = g * cg;
  innov.diagonal().array() += problem.gamma * problem.gamma;
  const Eigen::LLT<Eigen::MatrixXd> innov_llt(innov);
  if (innov_llt.info() != Eigen::Success) {
    throw std::runtime_error("rml_sample: innovation covariance factorization failed");
  }

  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  const Eigen::Index m = problem.data.size();
  for (int s = 0; s < n_samples; ++s) {
    const Eigen::VectorXd u_hat = problem.prior_mean + f * rng.normal_vector(n);
    const Eigen::VectorXd y_pert = problem.data + problem.gamma * rng.normal_vector(m);
    out.push_back(u_hat + cg * innov_llt.solve(y_pert - g * u_hat));
  }
  return out;
}

std::vector<Eigen::VectorXd> rml_sample(const Eigen::VectorXd& prior_mean,
                                        const Eigen::MatrixXd& prior_factor,
                                        const ObservationMask& forward, double gamma,
                                        const Eigen::VectorXd& data, int n_samples,
                                        RngStream& rng) {
  RmlProblem p{prior_mean, prior_factor, Eigen::MatrixXd(forward.weights().asDiagonal()),
               gamma, data};
  return rml_sample(p, n_samples, rng);
}

}  // namespace enkf
