#include "enkf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "enkf/navier_stokes.hpp"

namespace enkf {

ModelSpec ModelSpec::defaults(ModelKind kind) {
  ModelSpec s;
  s.kind = kind;
  s.dt_internal = kind == ModelKind::nse2d ? 0.005 : 0.001;
  return s;
}

void Dynamics::check_state(const StateVector& u, const char* what) const {
  if (u.kind != kind()) {
    throw std::invalid_argument(std::string(what) + ": state kind " +
                                std::string(to_string(u.kind)) + " does not match model " +
                                std::string(to_string(kind())));
  }
  if (u.dim() != dim()) {
    throw std::invalid_argument(std::string(what) + ": state dimension " +
                                std::to_string(u.dim()) + " != model dimension " +
                                std::to_string(dim()));
  }
}

int Dynamics::inner_steps(double h, bool require_multiple) const {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("step: h must be positive, got " + std::to_string(h));
  }
  const double dt = spec_.dt_internal;
  const double ratio = h / dt;
  if (require_multiple) {
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
      throw std::invalid_argument("step: h = " + std::to_string(h) +
                                  " is not an integer multiple of dt_internal = " +
                                  std::to_string(dt));
    }
    return static_cast<int>(n);
  }
  return std::max(1, static_cast<int>(std::ceil(ratio - 1e-9)));
}

StateVector rk4_integrate(const Dynamics& model, const StateVector& u, double h,
                          int substeps) {
  const double dt = h / substeps;
  StateVector x = u;
  for (int s = 0; s < substeps; ++s) {
    const StateVector k1 = model.rhs(x);
    const StateVector k2 = model.rhs(x + (0.5 * dt) * k1);
    const StateVector k3 = model.rhs(x + (0.5 * dt) * k2);
    const StateVector k4 = model.rhs(x + dt * k3);
    x.data += (dt / 6.0) * (k1.data + 2.0 * k2.data + 2.0 * k3.data + k4.data);
  }
  return x;
}

namespace {

class Lorenz63 final : public Dynamics {
 public:
  using Dynamics::Dynamics;
  Eigen::Index dim() const override { return 3; }

  StateVector rhs(const StateVector& u) const override {
    check_state(u, "rhs");
    const auto& p = spec().lorenz63;
    const double x = u.data[0], y = u.data[1], z = u.data[2];
    Eigen::Vector3d f(p.sigma * (y - x), p.rho * x - y - x * z, x * y - p.beta * z);
    return {ModelKind::lorenz63, f};
  }

  StateVector step(const StateVector& u, double h) const override {
    check_state(u, "step");
    return rk4_integrate(*this, u, h, inner_steps(h, false));
  }

  // B(u,u) = (0, x z, -x y).
  StateVector bilinear_form(const StateVector& u, const StateVector& v) const override {
    check_state(u, "bilinear_form");
    check_state(v, "bilinear_form");
    const auto& a = u.data;
    const auto& b = v.data;
    Eigen::Vector3d r(0.0, 0.5 * (a[0] * b[2] + b[0] * a[2]), -0.5 * (a[0] * b[1] + b[0] * a[1]));
    return {ModelKind::lorenz63, r};
  }
};

class Lorenz96 final : public Dynamics {
 public:
  explicit Lorenz96(ModelSpec spec) : Dynamics(std::move(spec)) {
    if (this->spec().lorenz96.dim < 4) {
      throw std::invalid_argument("lorenz96: dimension must be >= 4");
    }
  }
  Eigen::Index dim() const override { return spec().lorenz96.dim; }

  StateVector rhs(const StateVector& u) const override {
    check_state(u, "rhs");
    const Eigen::Index n = dim();
    const auto& x = u.data;
    Eigen::VectorXd f(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xp1 = x[(i + 1) % n];
      const double xm1 = x[(i + n - 1) % n];
      const double xm2 = x[(i + n - 2) % n];
      f[i] = (xp1 - xm2) * xm1 - x[i] + spec().lorenz96.forcing;
    }
    return {ModelKind::lorenz96, f};
  }

  StateVector step(const StateVector& u, double h) const override {
    check_state(u, "step");
    return rk4_integrate(*this, u, h, inner_steps(h, false));
  }

  // B(u,u)_i = -(x_{i+1} - x_{i-2}) x_{i-1}, symmetrized.
  StateVector bilinear_form(const StateVector& u, const StateVector& v) const override {
    check_state(u, "bilinear_form");
    check_state(v, "bilinear_form");
    const Eigen::Index n = dim();
    const auto& a = u.data;
    const auto& b = v.data;
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index p1 = (i + 1) % n, m1 = (i + n - 1) % n, m2 = (i + n - 2) % n;
      r[i] = -0.5 * ((a[p1] - a[m2]) * b[m1] + (b[p1] - b[m2]) * a[m1]);
    }
    return {ModelKind::lorenz96, r};
  }
};

class LinearModel final : public Dynamics {
 public:
  explicit LinearModel(ModelSpec spec) : Dynamics(std::move(spec)) {
    if (this->spec().linear.dim < 1) throw std::invalid_argument("linear: dim must be >= 1");
  }
  Eigen::Index dim() const override { return spec().linear.dim; }

  StateVector rhs(const StateVector& u) const override {
    check_state(u, "rhs");
    return {ModelKind::linear, spec().linear.rate * u.data};
  }
  StateVector step(const StateVector& u, double h) const override {
    check_state(u, "step");
    inner_steps(h, false);
    return {ModelKind::linear, std::exp(spec().linear.rate * h) * u.data};
  }
  StateVector bilinear_form(const StateVector& u, const StateVector& v) const override {
    check_state(u, "bilinear_form");
    check_state(v, "bilinear_form");
    return zero_state();
  }
};

}  // namespace

std::shared_ptr<const Dynamics> make_dynamics(const ModelSpec& spec) {
  if (!(spec.dt_internal > 0.0)) throw std::invalid_argument("dt_internal must be positive");
  switch (spec.kind) {
    case ModelKind::lorenz63: return std::make_shared<Lorenz63>(spec);
    case ModelKind::lorenz96: return std::make_shared<Lorenz96>(spec);
    case ModelKind::nse2d: return std::make_shared<NavierStokes2D>(spec);
    case ModelKind::linear: return std::make_shared<LinearModel>(spec);
  }
  throw std::invalid_argument("make_dynamics: unknown model kind");
}

AttractorSample collect_attractor_samples(const Dynamics& model, const StateVector& u0,
                                          double spin_up, double stride, int count) {
  if (count < 1) throw std::invalid_argument("collect_attractor_samples: count must be >= 1");
  AttractorSample out;
  out.spin_up = spin_up;
  out.stride = stride;
  StateVector u = spin_up > 0.0 ? model.step(u0, spin_up) : u0;
  out.states.push_back(u);
  for (int i = 1; i < count; ++i) {
    u = model.step(u, stride);
    out.states.push_back(u);
  }
  return out;
}

double attractor_norm_bound(const AttractorSample& samples) {
  double r = 0.0;
  for (const auto& s : samples.states) r = std::max(r, s.norm());
  return 1.5 * r;
}

double estimate_growth_rate(const Dynamics& model, double h, const AttractorSample& samples,
                            double perturbation_size, RngStream& rng, int directions) {
  if (samples.states.empty()) throw std::invalid_argument("estimate_growth_rate: no samples");
  if (!(perturbation_size > 0.0)) {
    throw std::invalid_argument("estimate_growth_rate: perturbation_size must be positive");
  }
  if (directions < 1) throw std::invalid_argument("estimate_growth_rate: directions >= 1");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v0 : samples.states) {
    const StateVector pv = model.step(v0, h);
    for (int d = 0; d < directions; ++d) {
      Eigen::VectorXd dir = rng.normal_vector(v0.dim());
      dir.normalize();
      const StateVector w0(v0.kind, v0.data + perturbation_size * dir);
      const double sep = (model.step(w0, h).data - pv.data).norm();
      best = std::max(best, std::log(sep / (w0.data - v0.data).norm()) / h);
    }
  }
  return best;
}

}  // namespace enkf
