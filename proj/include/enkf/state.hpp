#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace enkf {

enum class ModelKind { lorenz63, lorenz96, nse2d, linear };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// A point of state space.
///
/// For nse2d the data holds the real-coefficient view of the half-plane
/// Fourier coefficients: entries (2i, 2i+1) are sqrt(2) Re u_m and
/// sqrt(2) Im u_m for the i-th stored wavevector m (see SpectralLayout).
/// With that scaling the Euclidean inner product of `data` is the
/// (area-normalized) L2 inner product of the represented velocity fields.
struct StateVector {
  ModelKind kind = ModelKind::linear;
  Eigen::VectorXd data;

  StateVector() = default;
  StateVector(ModelKind k, Eigen::VectorXd d) : kind(k), data(std::move(d)) {}

  static StateVector zero(ModelKind k, Eigen::Index dim) {
    return {k, Eigen::VectorXd::Zero(dim)};
  }

  Eigen::Index dim() const { return data.size(); }
  double norm() const { return data.norm(); }
  double squared_norm() const { return data.squaredNorm(); }

  StateVector& operator+=(const StateVector& o);
  StateVector& operator-=(const StateVector& o);
  StateVector& operator*=(double s) {
    data *= s;
    return *this;
  }
};

/// Throws std::invalid_argument unless a and b have the same kind and size.
void require_compatible(const StateVector& a, const StateVector& b,
                        std::string_view what);

double dot(const StateVector& a, const StateVector& b);

inline StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
inline StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
inline StateVector operator*(double s, StateVector a) { return a *= s; }

}  // namespace enkf
