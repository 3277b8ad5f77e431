#include "enkf/navier_stokes.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace enkf {

namespace {

constexpr double kSeriesRadius = 1.0;

// sum_{n>=0} z^n / (n + k)!
double phi_series(double z, int k) {
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  double term = 1.0 / fact;
  double sum = term;
  for (int n = 1; n < 40; ++n) {
    term *= z / (n + k);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwDeleter>;
using SpecBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

RealBuffer real_buffer(std::size_t n) {
  return RealBuffer(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
}
SpecBuffer spec_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  for (std::size_t i = 0; i < n; ++i) p[i][0] = p[i][1] = 0.0;
  return SpecBuffer(p);
}

}  // namespace

double phi1(double z) {
  return std::abs(z) < kSeriesRadius ? phi_series(z, 1) : std::expm1(z) / z;
}
double phi2(double z) {
  return std::abs(z) < kSeriesRadius ? phi_series(z, 2) : (std::expm1(z) - z) / (z * z);
}
double phi3(double z) {
  return std::abs(z) < kSeriesRadius ? phi_series(z, 3)
                                     : (std::expm1(z) - z - 0.5 * z * z) / (z * z * z);
}

/// FFTW plans plus the map between stored modes and the r2c array. Plans are
/// immutable after construction; every transform runs on per-call buffers
/// through the new-array execute interface.
struct NavierStokes2D::Transforms {
  int n = 0;
  std::size_t real_size = 0;
  std::size_t spec_size = 0;
  fftw_plan c2r = nullptr;
  fftw_plan r2c = nullptr;

  struct ModeSlot {
    double perp1, perp2;  // m_perp / |m|
    double k1, k2;        // 2 pi m / L
    std::size_t slot;     // r2c index of +m
    long mirror;          // r2c index of -m when m2 == 0, else -1
  };
  std::vector<ModeSlot> slots;

  Transforms(const SpectralLayout& layout) : n(layout.grid()) {
    real_size = static_cast<std::size_t>(n) * n;
    spec_size = static_cast<std::size_t>(n) * (n / 2 + 1);
    {
      std::lock_guard lock(planner_mutex());
      RealBuffer r = real_buffer(real_size);
      SpecBuffer s = spec_buffer(spec_size);
      c2r = fftw_plan_dft_c2r_2d(n, n, s.get(), r.get(), FFTW_ESTIMATE);
      r2c = fftw_plan_dft_r2c_2d(n, n, r.get(), s.get(), FFTW_ESTIMATE);
    }
    if (c2r == nullptr || r2c == nullptr) throw std::runtime_error("FFTW planning failed");
    const double kscale = 2.0 * std::numbers::pi / layout.domain_length();
    const std::size_t half = static_cast<std::size_t>(n / 2 + 1);
    for (const auto& m : layout.modes()) {
      const double inv = 1.0 / std::sqrt(static_cast<double>(m.norm_sq()));
      const std::size_t row = static_cast<std::size_t>((m.m1 % n + n) % n);
      ModeSlot s{m.m2 * inv, -m.m1 * inv, kscale * m.m1, kscale * m.m2,
                 row * half + static_cast<std::size_t>(m.m2), -1};
      if (m.m2 == 0) s.mirror = static_cast<long>(static_cast<std::size_t>(n - m.m1) * half);
      slots.push_back(s);
    }
  }
  ~Transforms() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(c2r);
    fftw_destroy_plan(r2c);
  }

  // Velocity components of the real-view state `u` on the physical grid.
  void velocity(const Eigen::VectorXd& u, double* u1, double* u2) const {
    SpecBuffer s1 = spec_buffer(spec_size);
    SpecBuffer s2 = spec_buffer(spec_size);
    const double r = std::numbers::sqrt2 / 2.0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& s = slots[i];
      const double re = r * u[static_cast<Eigen::Index>(2 * i)];
      const double im = r * u[static_cast<Eigen::Index>(2 * i + 1)];
      s1[s.slot][0] = re * s.perp1;
      s1[s.slot][1] = im * s.perp1;
      s2[s.slot][0] = re * s.perp2;
      s2[s.slot][1] = im * s.perp2;
      if (s.mirror >= 0) {
        const auto j = static_cast<std::size_t>(s.mirror);
        s1[j][0] = re * s.perp1;
        s1[j][1] = -im * s.perp1;
        s2[j][0] = re * s.perp2;
        s2[j][1] = -im * s.perp2;
      }
    }
    fftw_execute_dft_c2r(c2r, s1.get(), u1);
    fftw_execute_dft_c2r(c2r, s2.get(), u2);
  }

  // Leray-projected divergence of the symmetric tensor (p11, p12; p12, p22),
  // returned in the real-coefficient view. Destroys the inputs.
  Eigen::VectorXd projected_divergence(double* p11, double* p12, double* p22) const {
    SpecBuffer t11 = spec_buffer(spec_size);
    SpecBuffer t12 = spec_buffer(spec_size);
    SpecBuffer t22 = spec_buffer(spec_size);
    fftw_execute_dft_r2c(r2c, p11, t11.get());
    fftw_execute_dft_r2c(r2c, p12, t12.get());
    fftw_execute_dft_r2c(r2c, p22, t22.get());
    const double norm = 1.0 / static_cast<double>(real_size);
    Eigen::VectorXd out(static_cast<Eigen::Index>(2 * slots.size()));
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& s = slots[i];
      const std::complex<double> a11(t11[s.slot][0], t11[s.slot][1]);
      const std::complex<double> a12(t12[s.slot][0], t12[s.slot][1]);
      const std::complex<double> a22(t22[s.slot][0], t22[s.slot][1]);
      const std::complex<double> ik(0.0, norm);
      const std::complex<double> w1 = ik * (s.k1 * a11 + s.k2 * a12);
      const std::complex<double> w2 = ik * (s.k1 * a12 + s.k2 * a22);
      const std::complex<double> c = w1 * s.perp1 + w2 * s.perp2;
      out[static_cast<Eigen::Index>(2 * i)] = std::numbers::sqrt2 * c.real();
      out[static_cast<Eigen::Index>(2 * i + 1)] = std::numbers::sqrt2 * c.imag();
    }
    return out;
  }
};

NavierStokes2D::NavierStokes2D(ModelSpec spec)
    : Dynamics(std::move(spec)),
      layout_(this->spec().nse.grid, this->spec().nse.length) {
  const NseParams& p = this->spec().nse;
  if (!(p.nu > 0.0)) throw std::invalid_argument("nse2d: viscosity must be positive");
  if (!(this->spec().dt_internal > 0.0)) {
    throw std::invalid_argument("nse2d: dt_internal must be positive");
  }
  const Eigen::Index n = layout_.dim();
  stokes_.resize(n);
  for (std::size_t i = 0; i < layout_.num_modes(); ++i) {
    const double eig = p.nu * layout_.wavenumber_sq(i);
    stokes_[static_cast<Eigen::Index>(2 * i)] = eig;
    stokes_[static_cast<Eigen::Index>(2 * i + 1)] = eig;
  }

  forcing_ = layout_.zero_state();
  if (p.f_amp != 0.0) {
    if ((p.kf1 == 0 && p.kf2 == 0) || !layout_.retained(p.kf1, p.kf2)) {
      throw std::invalid_argument("nse2d: forcing wavevector (" + std::to_string(p.kf1) + "," +
                                  std::to_string(p.kf2) + ") is not resolved on the grid");
    }
    // f = c grad_perp cos(2 pi k_f.x / L) has coefficient i c pi |k_f| / L at
    // +k_f; |f|^2 = 2 |f_kf|^2 fixes c.
    layout_.set_coefficient(forcing_, p.kf1, p.kf2,
                            {0.0, p.f_amp / std::numbers::sqrt2});
  }

  fft_ = std::make_unique<Transforms>(layout_);

  const double dt = this->spec().dt_internal;
  exp_full_.resize(n);
  exp_half_.resize(n);
  coef_half_.resize(n);
  coef_a_.resize(n);
  coef_b_.resize(n);
  coef_c_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = -stokes_[i] * dt;
    exp_full_[i] = std::exp(z);
    exp_half_[i] = std::exp(0.5 * z);
    coef_half_[i] = 0.5 * dt * phi1(0.5 * z);
    const double p1 = phi1(z), p2 = phi2(z), p3 = phi3(z);
    coef_a_[i] = dt * (p1 - 3.0 * p2 + 4.0 * p3);
    coef_b_[i] = dt * (p2 - 2.0 * p3);
    coef_c_[i] = dt * (4.0 * p3 - p2);
  }
}

NavierStokes2D::~NavierStokes2D() = default;

Eigen::VectorXd NavierStokes2D::bilinear(const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& v) const {
  const std::size_t n = fft_->real_size;
  RealBuffer u1 = real_buffer(n), u2 = real_buffer(n);
  fft_->velocity(u, u1.get(), u2.get());
  RealBuffer p11 = real_buffer(n), p12 = real_buffer(n), p22 = real_buffer(n);
  if (&u == &v) {
    for (std::size_t i = 0; i < n; ++i) {
      p11[i] = u1[i] * u1[i];
      p12[i] = u1[i] * u2[i];
      p22[i] = u2[i] * u2[i];
    }
  } else {
    RealBuffer v1 = real_buffer(n), v2 = real_buffer(n);
    fft_->velocity(v, v1.get(), v2.get());
    for (std::size_t i = 0; i < n; ++i) {
      p11[i] = u1[i] * v1[i];
      p12[i] = 0.5 * (u1[i] * v2[i] + u2[i] * v1[i]);
      p22[i] = u2[i] * v2[i];
    }
  }
  // div(u (x) v) = (v.grad) u for divergence-free v, so the symmetrized
  // tensor yields (1/2) P(u.grad v) + (1/2) P(v.grad u).
  return fft_->projected_divergence(p11.get(), p12.get(), p22.get());
}

Eigen::VectorXd NavierStokes2D::nonlinear_term(const Eigen::VectorXd& u) const {
  if (!spec().nse.nonlinear) return forcing_.data;
  return forcing_.data - bilinear(u, u);
}

StateVector NavierStokes2D::bilinear_form(const StateVector& u, const StateVector& v) const {
  check_state(u, "bilinear_form");
  check_state(v, "bilinear_form");
  return {ModelKind::nse2d, bilinear(u.data, v.data)};
}

StateVector NavierStokes2D::rhs(const StateVector& u) const {
  check_state(u, "rhs");
  return {ModelKind::nse2d, nonlinear_term(u.data) - stokes_.cwiseProduct(u.data)};
}

StateVector NavierStokes2D::stokes_semigroup(const StateVector& u, double t) const {
  check_state(u, "stokes_semigroup");
  return {ModelKind::nse2d, ((-t) * stokes_).array().exp().matrix().cwiseProduct(u.data)};
}

StateVector NavierStokes2D::step(const StateVector& u, double h) const {
  check_state(u, "step");
  const int steps = inner_steps(h, true);
  Eigen::ArrayXd x = u.data.array();
  const auto& E = exp_full_.array();
  const auto& E2 = exp_half_.array();
  const auto& Q = coef_half_.array();
  for (int s = 0; s < steps; ++s) {
    const Eigen::ArrayXd nu = nonlinear_term(x.matrix()).array();
    const Eigen::ArrayXd a = E2 * x + Q * nu;
    const Eigen::ArrayXd na = nonlinear_term(a.matrix()).array();
    const Eigen::ArrayXd b = E2 * x + Q * na;
    const Eigen::ArrayXd nb = nonlinear_term(b.matrix()).array();
    const Eigen::ArrayXd c = E2 * a + Q * (2.0 * nb - nu);
    const Eigen::ArrayXd nc = nonlinear_term(c.matrix()).array();
    x = E * x + coef_a_.array() * nu + 2.0 * coef_b_.array() * (na + nb) +
        coef_c_.array() * nc;
  }
  return {ModelKind::nse2d, x.matrix()};
}

}  // namespace enkf
