#pragma once

#include "enkf/rng.hpp"
#include "enkf/spectral_layout.hpp"
#include "enkf/state.hpp"

namespace enkf {

/// Centered Gaussian law diagonal in the Stokes eigenbasis.
///
///   scaled_inverse_stokes_sq : nu^2 A^{-2}, per-mode variance (L / (2 pi |m|))^4
///   scaled_inverse_stokes    : c A^{-1},   per-mode variance c / (nu |2 pi m / L|^2)
///   white                    : sigma^2 I,  per-mode variance sigma^2
///
/// "Per-mode variance" is E|u_m|^2; real and imaginary parts each carry half.
struct GaussianFieldLaw {
  enum class Kind { scaled_inverse_stokes_sq, scaled_inverse_stokes, white };

  Kind kind = Kind::white;
  double amplitude = 0.0;  // nu, c or sigma depending on kind
  double viscosity = 0.0;  // nu of the Stokes operator A (spectral kinds)

  static GaussianFieldLaw inverse_stokes_sq(double nu) {
    return {Kind::scaled_inverse_stokes_sq, nu, nu};
  }
  static GaussianFieldLaw inverse_stokes(double c, double nu) {
    return {Kind::scaled_inverse_stokes, c, nu};
  }
  static GaussianFieldLaw white(double sigma) { return {Kind::white, sigma, 0.0}; }

  /// E|u_m|^2 for a mode with |2 pi m / L|^2 = wavenumber_sq.
  double mode_variance(double wavenumber_sq) const;
};

/// Sample on the nse2d layout.
StateVector sample_gaussian_field(const GaussianFieldLaw& law, const SpectralLayout& layout,
                                  RngStream& rng);

/// White-law sample for a dense state (Lorenz / linear models).
StateVector sample_gaussian_field(const GaussianFieldLaw& law, ModelKind kind,
                                  Eigen::Index dim, RngStream& rng);

}  // namespace enkf
