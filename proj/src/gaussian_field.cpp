#include "enkf/gaussian_field.hpp"

#include <cmath>
#include <stdexcept>

namespace enkf {

namespace {

void validate(const GaussianFieldLaw& law) {
  using K = GaussianFieldLaw::Kind;
  if (law.kind == K::white) {
    if (law.amplitude < 0.0) throw std::invalid_argument("white law: sigma must be >= 0");
    return;
  }
  if (!(law.amplitude > 0.0)) {
    throw std::invalid_argument("Gaussian field law: amplitude must be positive");
  }
  if (!(law.viscosity > 0.0)) {
    throw std::invalid_argument("Gaussian field law: viscosity must be positive");
  }
}

}  // namespace

double GaussianFieldLaw::mode_variance(double wavenumber_sq) const {
  switch (kind) {
    case Kind::scaled_inverse_stokes_sq: {
      const double eig = viscosity * wavenumber_sq;
      return amplitude * amplitude / (eig * eig);
    }
    case Kind::scaled_inverse_stokes:
      return amplitude / (viscosity * wavenumber_sq);
    case Kind::white:
      return amplitude * amplitude;
  }
  return 0.0;
}

StateVector sample_gaussian_field(const GaussianFieldLaw& law, const SpectralLayout& layout,
                                  RngStream& rng) {
  validate(law);
  StateVector u = layout.zero_state();
  // In the real-coefficient view each of the two reals has variance E|u_m|^2.
  for (std::size_t i = 0; i < layout.num_modes(); ++i) {
    const double sd = std::sqrt(law.mode_variance(layout.wavenumber_sq(i)));
    u.data[static_cast<Eigen::Index>(2 * i)] = sd * rng.normal();
    u.data[static_cast<Eigen::Index>(2 * i + 1)] = sd * rng.normal();
  }
  return u;
}

StateVector sample_gaussian_field(const GaussianFieldLaw& law, ModelKind kind,
                                  Eigen::Index dim, RngStream& rng) {
  validate(law);
  if (law.kind != GaussianFieldLaw::Kind::white) {
    throw std::invalid_argument("spectral Gaussian laws need an nse2d layout");
  }
  return {kind, law.amplitude * rng.normal_vector(dim)};
}

}  // namespace enkf
