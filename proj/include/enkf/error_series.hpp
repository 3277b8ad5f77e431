#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "enkf/dynamics.hpp"
#include "enkf/ensemble.hpp"
#include "enkf/spectral_layout.hpp"

namespace enkf {

struct SeriesOptions {
  /// Wavevectors to track (nse2d). For ODE models (i, 0) tracks component i.
  std::vector<Wavevector> tracked_modes;
  int tracked_members = 3;

  static SeriesOptions defaults(ModelKind kind);
};

/// Per-record filter diagnostics at observation (or recording) times.
struct ErrorSeries {
  std::vector<long> step;
  std::vector<long> substep;  // continuous runs only
  std::vector<double> time;
  std::vector<double> rel_err_mean;     // |m - u| / |u|
  std::vector<double> rel_err_member1;  // |v^(1) - u| / |u|
  std::vector<double> mean_member_mse;  // (1/K) sum_k |v^(k) - u|^2
  std::vector<double> spread;           // sqrt(tr C)
  std::vector<double> max_member_norm;
  std::vector<std::vector<double>> member_sq_err;  // [record][k] |v^(k) - u|^2

  std::vector<Wavevector> modes;
  int members_tracked = 0;
  std::vector<std::vector<std::complex<double>>> truth_modes;                // [record][mode]
  std::vector<std::vector<std::vector<std::complex<double>>>> member_modes;  // [record][member][mode]

  bool continuous = false;

  std::size_t size() const { return step.size(); }

  /// Appends one record. Throws NumericalFailure on non-finite members.
  void record(long step_index, long substep_index, double t, const Ensemble& ensemble, const StateVector& truth,
              const Dynamics& model, const SeriesOptions& options);

  /// Mean of `values` over records [first, size()).
  static double tail_mean(const std::vector<double>& values, std::size_t first);
};

/// Mode coefficient used for tracking; ODE models report (data[m1], 0).
std::complex<double> tracked_coefficient(const StateVector& u, const Wavevector& m,
                                         const Dynamics& model);

/// CSV with header row. Discrete columns:
///   step,time,rel_err_mean,mean_member_mse,spread,
///   then per mode: truth_re_<m1>_<m2>,truth_im_<m1>_<m2>,
///   member<k>_re_<m1>_<m2>,member<k>_im_<m1>_<m2> for k = 1..M.
/// Continuous series add `substep` (inner step index n, time = n dt) after
/// `step` and `rel_err_member1` after `rel_err_mean`.
void write_series_csv(std::ostream& out, const ErrorSeries& series);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& s);

}  // namespace enkf
