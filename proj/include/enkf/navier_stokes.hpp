#pragma once

#include <memory>
#include <vector>

#include "enkf/dynamics.hpp"
#include "enkf/spectral_layout.hpp"

namespace enkf {

/// phi_k(z) = sum_{n>=0} z^n / (n + k)!, evaluated without cancellation.
double phi1(double z);
double phi2(double z);
double phi3(double z);

/// Incompressible 2D Navier-Stokes on the torus [0, L)^2 in the
/// divergence-free Fourier basis. The nonlinearity is evaluated
/// pseudo-spectrally on a grid x grid mesh with two-thirds dealiasing, and
/// time stepping is ETD4RK with the exact Stokes semigroup.
class NavierStokes2D final : public Dynamics {
 public:
  explicit NavierStokes2D(ModelSpec spec);
  ~NavierStokes2D() override;

  Eigen::Index dim() const override { return layout_.dim(); }
  StateVector rhs(const StateVector& u) const override;
  StateVector step(const StateVector& u, double h) const override;
  StateVector bilinear_form(const StateVector& u, const StateVector& v) const override;
  const SpectralLayout* layout() const override { return &layout_; }

  /// Eigenvalue nu |2 pi m / L|^2 of the Stokes operator, per real component.
  const Eigen::VectorXd& stokes_eigenvalues() const { return stokes_; }
  const StateVector& forcing() const { return forcing_; }

  /// Exact Stokes semigroup exp(-A t) u.
  StateVector stokes_semigroup(const StateVector& u, double t) const;

 private:
  struct Transforms;

  Eigen::VectorXd nonlinear_term(const Eigen::VectorXd& u) const;  // f - B(u,u)
  Eigen::VectorXd bilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

  SpectralLayout layout_;
  Eigen::VectorXd stokes_;
  StateVector forcing_;
  std::unique_ptr<Transforms> fft_;

  // ETD4RK coefficients for one dt_internal step.
  Eigen::VectorXd exp_full_, exp_half_, coef_half_, coef_a_, coef_b_, coef_c_;
};

}  // namespace enkf
