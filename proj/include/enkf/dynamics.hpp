#pragma once

#include <memory>
#include <vector>

#include "enkf/rng.hpp"
#include "enkf/spectral_layout.hpp"
#include "enkf/state.hpp"

namespace enkf {

struct Lorenz63Params {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
};

struct Lorenz96Params {
  int dim = 40;
  double forcing = 8.0;
};

struct NseParams {
  double length = 2.0;
  double nu = 0.01;
  int kf1 = 5;
  int kf2 = 5;
  double f_amp = 10.0;  // L2 norm of the forcing field
  int grid = 32;
  bool nonlinear = true;  // test hook: false drops B(u,u)
};

/// du/dt = rate * u on R^dim. rate = 0 gives the identity semigroup.
struct LinearParams {
  int dim = 1;
  double rate = 0.0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::lorenz63;
  Lorenz63Params lorenz63;
  Lorenz96Params lorenz96;
  NseParams nse;
  LinearParams linear;
  /// Inner integration step. nse2d requires step lengths that are integer
  /// multiples of it; ODE models split h into ceil(h / dt_internal) equal
  /// RK4 substeps.
  double dt_internal = 0.001;

  static ModelSpec defaults(ModelKind kind);
};

/// The semigroup Psi_h of du/dt + A u + B(u, u) = f for one test model.
class Dynamics {
 public:
  explicit Dynamics(ModelSpec spec) : spec_(std::move(spec)) {}
  virtual ~Dynamics() = default;

  const ModelSpec& spec() const { return spec_; }
  ModelKind kind() const { return spec_.kind; }
  virtual Eigen::Index dim() const = 0;

  /// F(u) = f - A u - B(u, u).
  virtual StateVector rhs(const StateVector& u) const = 0;
  /// Approximates Psi_h(u). Deterministic.
  virtual StateVector step(const StateVector& u, double h) const = 0;
  /// Symmetric bilinear form with B(u, u) the quadratic nonlinearity.
  virtual StateVector bilinear_form(const StateVector& u, const StateVector& v) const = 0;

  /// Spectral layout for nse2d, nullptr otherwise.
  virtual const SpectralLayout* layout() const { return nullptr; }

  StateVector zero_state() const { return StateVector::zero(kind(), dim()); }

 protected:
  void check_state(const StateVector& u, const char* what) const;
  /// Number of inner steps for a step of length h; validates h.
  int inner_steps(double h, bool require_multiple) const;

 private:
  ModelSpec spec_;
};

std::shared_ptr<const Dynamics> make_dynamics(const ModelSpec& spec);

/// Classical RK4 substepping shared by the ODE models.
StateVector rk4_integrate(const Dynamics& model, const StateVector& u, double h, int substeps);

struct AttractorSample {
  std::vector<StateVector> states;
  double spin_up = 0.0;
  double stride = 0.0;
};

/// Runs `spin_up` time units from u0 and then records `count` states
/// spaced `stride` apart.
AttractorSample collect_attractor_samples(const Dynamics& model, const StateVector& u0,
                                          double spin_up, double stride, int count);

/// 1.5 x the largest norm observed in the sample.
double attractor_norm_bound(const AttractorSample& samples);

/// Empirical proxy for the one-step growth exponent beta:
///   max over samples v0 and random unit directions d of
///   (1/h) log(|Psi_h(v0) - Psi_h(v0 + eps d)| / eps).
double estimate_growth_rate(const Dynamics& model, double h, const AttractorSample& samples,
                            double perturbation_size, RngStream& rng, int directions = 4);

}  // namespace enkf
