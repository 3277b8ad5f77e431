#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "enkf/state.hpp"

namespace enkf {

struct Wavevector {
  int m1 = 0;
  int m2 = 0;
  int norm_sq() const { return m1 * m1 + m2 * m2; }
  friend bool operator==(const Wavevector&, const Wavevector&) = default;
};

/// Retained wavevectors of a periodic 2D velocity field in the
/// divergence-free basis psi_m(x) = (m_perp/|m|) exp(2 pi i m.x / L),
/// m_perp = (m2, -m1).
///
/// Only the half-plane {m2 > 0} U {m2 = 0, m1 > 0} is stored; the other half
/// follows from the reality constraint u_{-m} = -conj(u_m). A physical grid
/// of `grid` points per axis retains max(|m1|,|m2|) <= grid/3.
class SpectralLayout {
 public:
  SpectralLayout(int grid, double domain_length);

  int grid() const { return grid_; }
  int max_mode() const { return max_mode_; }
  double domain_length() const { return length_; }

  std::size_t num_modes() const { return modes_.size(); }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(2 * modes_.size()); }
  const std::vector<Wavevector>& modes() const { return modes_; }
  const Wavevector& mode(std::size_t i) const { return modes_[i]; }

  bool retained(int m1, int m2) const;
  /// Index of m in the stored half-plane, or -1 if m (not -m) is not stored.
  int stored_index(int m1, int m2) const;

  /// |2 pi m / L|^2 for stored mode i.
  double wavenumber_sq(std::size_t i) const;

  /// Coefficient u_m for any retained m (either half-plane); zero otherwise.
  std::complex<double> coefficient(const StateVector& u, int m1, int m2) const;
  void set_coefficient(StateVector& u, int m1, int m2, std::complex<double> c) const;

  std::vector<std::complex<double>> to_complex(const StateVector& u) const;
  StateVector from_complex(const std::vector<std::complex<double>>& c) const;

  StateVector zero_state() const { return StateVector::zero(ModelKind::nse2d, dim()); }

  /// Velocity (u1, u2) at each of `n` x `n` grid points, evaluated by direct
  /// summation over all retained modes. Row-major (i1 * n + i2). Intended
  /// for verification on small grids; the dynamics use FFTs instead.
  struct Field {
    std::vector<std::complex<double>> u1;
    std::vector<std::complex<double>> u2;
  };
  Field direct_synthesis(const StateVector& u, int n) const;

 private:
  int grid_;
  int max_mode_;
  double length_;
  std::vector<Wavevector> modes_;
  std::vector<int> lookup_;  // (2M+1)^2 table of stored indices, -1 if absent
};

}  // namespace enkf
