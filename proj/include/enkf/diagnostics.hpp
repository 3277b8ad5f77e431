#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "enkf/continuous_filter.hpp"
#include "enkf/discrete_filter.hpp"
#include "enkf/dynamics.hpp"

namespace enkf {

/// theta = gamma^2 / (gamma^2 + alpha^2) * exp(2 beta h).
double theta(double gamma, double alpha_sq, double beta_hat, double h);

/// |m - u| / |u|. Throws std::invalid_argument if |u| = 0.
double relative_error(const StateVector& m, const StateVector& u);

/// Compensated summation.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = sum_ + y;
    c_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

struct McStat {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t count = 0;
};

/// Mean and standard error of the mean.
McStat mc_stat(const std::vector<double>& samples);

/// e^{2 b h j} e0 + 2 K gamma^2 (e^{2 b h j} - 1) / (e^{2 b h} - 1), with the
/// limit e0 + 2 K gamma^2 j as b h -> 0.
double envelope_disc(double beta_hat, double h, int K, double gamma, double e0, long j);

/// theta^j e0 + 2 K gamma^2 (1 - theta^j) / (1 - theta); theta < 1.
double envelope_varinf(double theta_value, int K, double gamma, double e0, long j);

struct BoundRow {
  std::string series;  // curve label, e.g. "dt=0.001"
  long step = 0;
  double time = 0.0;
  double mc_mean = 0.0;
  double halfwidth = 0.0;  // 2 standard errors
  double envelope = 0.0;
  bool pass = true;
};

struct SensitivityRow {
  double beta_multiplier = 1.0;
  double beta = 0.0;
  double theta = 0.0;  // varinf only
  bool pass = false;
};

struct BoundReport {
  std::string theorem;  // "disc", "varinf" or "cts"
  std::vector<BoundRow> rows;
  bool passed = false;

  double beta_hat = 0.0;
  double theta_hat = 0.0;
  int ensemble_size = 0;
  double gamma = 0.0;
  double alpha_sq = 0.0;
  double h = 0.0;
  int n_mc = 0;
  int divergent = 0;

  // varinf: long-run level over the final `tail_steps` steps.
  double asymptote = 0.0;
  McStat tail;
  bool asymptote_pass = true;

  // cts: fitted rate per dt and the time integral of the MC curve.
  std::vector<double> dts;
  std::vector<double> rho;
  std::vector<double> integral;
  bool rho_stable = true;

  std::vector<SensitivityRow> sensitivity;
};

/// Lorenz-type theorem check parameters (H = I).
struct TheoremParams {
  /// Must be the identity; the theorems assume full observation.
  ObservationOperator observation = ObservationOperator::identity();
  double h = 0.1;
  double gamma = 0.01;
  double alpha_sq = 0.0;
  int ensemble_size = 10;
  int n_mc = 200;
  int steps = 10;
  int tracked_member = 0;
  EnsembleInit init = EnsembleInit::white(1.0, 0.5);
  double spin_up = 10.0;
  std::uint64_t seed = 1;

  /// Supplied growth rate; estimated via estimate_growth_rate when NaN.
  double beta_hat = std::numeric_limits<double>::quiet_NaN();
  int growth_samples = 50;
  double growth_stride = 0.5;
  double growth_eps = 1e-6;
  int growth_directions = 4;

  // varinf: if alpha_sq <= 0, choose it so that theta = theta_target.
  double theta_target = 0.5;
  int tail_steps = 60;

  // cts
  std::vector<double> dt_list{1e-3, 5e-4};
  double T = 1.0;
  double record_interval = 0.01;
  double fit_start = 0.1;  // fraction of T
  double rho_tolerance = 0.2;
};

/// Throws ConfigError for partial observation or invalid values.
void validate_theorem_params(const TheoremParams& p);

/// beta_hat from attractor samples of the model at step h.
double estimate_beta(const Dynamics& model, const TheoremParams& p);

BoundReport check_theorem_disc(const Dynamics& model, const TheoremParams& p);
/// Throws ConfigError when theta_hat >= 1.
BoundReport check_theorem_varinf(const Dynamics& model, const TheoremParams& p);
BoundReport check_theorem_cts(const Dynamics& model, const TheoremParams& p);

/// Columns: series,step,time,mc_mean,halfwidth,envelope,pass
void write_bound_csv(std::ostream& out, const BoundReport& report);
/// key=value summary lines.
void write_bound_summary(std::ostream& out, const BoundReport& report);

}  // namespace enkf
