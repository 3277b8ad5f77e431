#include "enkf/spectral_layout.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace enkf {

namespace {

bool upper_half(int m1, int m2) { return m2 > 0 || (m2 == 0 && m1 > 0); }

}  // namespace

SpectralLayout::SpectralLayout(int grid, double domain_length)
    : grid_(grid), max_mode_(grid / 3), length_(domain_length) {
  if (grid < 16 || (grid & (grid - 1)) != 0) {
    throw std::invalid_argument("nse2d grid must be a power of two >= 16, got " +
                                std::to_string(grid));
  }
  if (!(domain_length > 0.0)) {
    throw std::invalid_argument("domain length must be positive");
  }
  const int side = 2 * max_mode_ + 1;
  lookup_.assign(static_cast<std::size_t>(side * side), -1);
  for (int m2 = 0; m2 <= max_mode_; ++m2) {
    for (int m1 = -max_mode_; m1 <= max_mode_; ++m1) {
      if (!upper_half(m1, m2)) continue;
      lookup_[static_cast<std::size_t>((m1 + max_mode_) * side + (m2 + max_mode_))] =
          static_cast<int>(modes_.size());
      modes_.push_back({m1, m2});
    }
  }
}

bool SpectralLayout::retained(int m1, int m2) const {
  return std::abs(m1) <= max_mode_ && std::abs(m2) <= max_mode_ && (m1 != 0 || m2 != 0);
}

int SpectralLayout::stored_index(int m1, int m2) const {
  if (!retained(m1, m2)) return -1;
  const int side = 2 * max_mode_ + 1;
  return lookup_[static_cast<std::size_t>((m1 + max_mode_) * side + (m2 + max_mode_))];
}

double SpectralLayout::wavenumber_sq(std::size_t i) const {
  const double k = 2.0 * std::numbers::pi / length_;
  return k * k * modes_[i].norm_sq();
}

std::complex<double> SpectralLayout::coefficient(const StateVector& u, int m1,
                                                 int m2) const {
  if (u.dim() != dim()) throw std::invalid_argument("coefficient: dimension mismatch");
  if (!retained(m1, m2)) return {0.0, 0.0};
  const double s = std::numbers::sqrt2 / 2.0;
  if (int i = stored_index(m1, m2); i >= 0) {
    return {s * u.data[2 * i], s * u.data[2 * i + 1]};
  }
  const int i = stored_index(-m1, -m2);
  return -std::conj(std::complex<double>(s * u.data[2 * i], s * u.data[2 * i + 1]));
}

void SpectralLayout::set_coefficient(StateVector& u, int m1, int m2,
                                     std::complex<double> c) const {
  if (u.dim() != dim()) throw std::invalid_argument("set_coefficient: dimension mismatch");
  if (!retained(m1, m2)) {
    throw std::invalid_argument("set_coefficient: wavevector (" + std::to_string(m1) +
                                "," + std::to_string(m2) + ") not retained");
  }
  int i = stored_index(m1, m2);
  if (i < 0) {
    i = stored_index(-m1, -m2);
    c = -std::conj(c);
  }
  u.data[2 * i] = std::numbers::sqrt2 * c.real();
  u.data[2 * i + 1] = std::numbers::sqrt2 * c.imag();
}

std::vector<std::complex<double>> SpectralLayout::to_complex(const StateVector& u) const {
  if (u.dim() != dim()) throw std::invalid_argument("to_complex: dimension mismatch");
  const double s = std::numbers::sqrt2 / 2.0;
  std::vector<std::complex<double>> c(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    c[i] = {s * u.data[2 * i], s * u.data[2 * i + 1]};
  }
  return c;
}

StateVector SpectralLayout::from_complex(const std::vector<std::complex<double>>& c) const {
  if (c.size() != modes_.size()) throw std::invalid_argument("from_complex: size mismatch");
  StateVector u = zero_state();
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    u.data[2 * i] = std::numbers::sqrt2 * c[i].real();
    u.data[2 * i + 1] = std::numbers::sqrt2 * c[i].imag();
  }
  return u;
}

SpectralLayout::Field SpectralLayout::direct_synthesis(const StateVector& u, int n) const {
  Field f;
  f.u1.assign(static_cast<std::size_t>(n * n), {0.0, 0.0});
  f.u2.assign(static_cast<std::size_t>(n * n), {0.0, 0.0});
  // Sum over the full set of retained wavevectors, both half-planes, so that
  // any violation of the reality constraint shows up as an imaginary part.
  for (int m1 = -max_mode_; m1 <= max_mode_; ++m1) {
    for (int m2 = -max_mode_; m2 <= max_mode_; ++m2) {
      if (!retained(m1, m2)) continue;
      const std::complex<double> c = coefficient(u, m1, m2);
      const double inv = 1.0 / std::sqrt(static_cast<double>(m1 * m1 + m2 * m2));
      for (int i1 = 0; i1 < n; ++i1) {
        for (int i2 = 0; i2 < n; ++i2) {
          const double phase = 2.0 * std::numbers::pi * (m1 * i1 + m2 * i2) / n;
          const std::complex<double> e = c * std::polar(1.0, phase);
          const std::size_t p = static_cast<std::size_t>(i1 * n + i2);
          f.u1[p] += e * (m2 * inv);
          f.u2[p] += e * (-m1 * inv);
        }
      }
    }
  }
  return f;
}

}  // namespace enkf
