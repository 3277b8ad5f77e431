#pragma once

#include <vector>

#include <Eigen/Dense>

#include "enkf/observation.hpp"
#include "enkf/rng.hpp"

namespace enkf {

/// Linear-Gaussian inverse problem u ~ N(m_hat, C_hat), y = G u + N(0, gamma^2 I),
/// with C_hat = F F^T given through a square factor F.
struct RmlProblem {
  Eigen::VectorXd prior_mean;
  Eigen::MatrixXd prior_factor;
  Eigen::MatrixXd forward;  // G
  double gamma = 1.0;
  Eigen::VectorXd data;     // y
};

/// Randomized maximum likelihood: each sample minimizes
///   1/2 |y - G u + gamma xi|^2 / gamma^2 + 1/2 |u - u_hat|^2_{C_hat},
/// u_hat ~ N(m_hat, C_hat), which makes it an exact posterior draw.
/// Throws std::invalid_argument if C_hat is singular.
std::vector<Eigen::VectorXd> rml_sample(const RmlProblem& problem, int n_samples,
                                        RngStream& rng);

/// Same with G given as a spectral mask.
std::vector<Eigen::VectorXd> rml_sample(const Eigen::VectorXd& prior_mean,
                                        const Eigen::MatrixXd& prior_factor,
                                        const ObservationMask& forward, double gamma,
                                        const Eigen::VectorXd& data, int n_samples,
                                        RngStream& rng);

}  // namespace enkf
