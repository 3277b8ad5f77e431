#include "enkf/error_series.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "enkf/errors.hpp"

namespace enkf {

SeriesOptions SeriesOptions::defaults(ModelKind kind) {
  SeriesOptions o;
  switch (kind) {
    case ModelKind::nse2d:
      o.tracked_modes = {{1, 0}, {0, 1}, {1, 1}, {2, 1}, {5, 5}};
      break;
    case ModelKind::lorenz63:
      o.tracked_modes = {{0, 0}, {1, 0}, {2, 0}};
      break;
    case ModelKind::lorenz96:
      o.tracked_modes = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
      break;
    case ModelKind::linear:
      o.tracked_modes = {{0, 0}};
      break;
  }
  return o;
}

std::complex<double> tracked_coefficient(const StateVector& u, const Wavevector& m,
                                         const Dynamics& model) {
  if (const SpectralLayout* layout = model.layout()) {
    return layout->coefficient(u, m.m1, m.m2);
  }
  if (m.m1 < 0 || m.m1 >= u.dim()) return {0.0, 0.0};
  return {u.data[m.m1], 0.0};
}

void ErrorSeries::record(long step_index, long substep_index, double t,
                         const Ensemble& ensemble, const StateVector& truth,
                         const Dynamics& model, const SeriesOptions& options) {
  require_compatible(ensemble.mean(), truth, "ErrorSeries::record");
  if (size() == 0) {
    modes = options.tracked_modes;
    members_tracked =
        std::min(options.tracked_members, static_cast<int>(ensemble.size()));
  }
  const double un = truth.norm();
  const double scale = un > 0.0 ? un : 1.0;
  const std::size_t k_count = ensemble.size();

  std::vector<double> sq(k_count);
  double mse = 0.0;
  double max_norm = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto& v = ensemble.member(k).data;
    if (!v.allFinite()) {
      throw NumericalFailure("non-finite ensemble member " + std::to_string(k) + " at step " +
                             std::to_string(step_index));
    }
    sq[k] = (v - truth.data).squaredNorm();
    mse += sq[k];
    max_norm = std::max(max_norm, v.norm());
  }
  mse /= static_cast<double>(k_count);
  if (!std::isfinite(mse) || !std::isfinite(max_norm)) {
    throw NumericalFailure("ensemble blow-up at step " + std::to_string(step_index));
  }

  step.push_back(step_index);
  substep.push_back(substep_index);
  time.push_back(t);
  rel_err_mean.push_back((ensemble.mean().data - truth.data).norm() / scale);
  rel_err_member1.push_back(std::sqrt(sq[0]) / scale);
  mean_member_mse.push_back(mse);
  spread.push_back(ensemble.spread());
  max_member_norm.push_back(max_norm);
  member_sq_err.push_back(std::move(sq));

  std::vector<std::complex<double>> tm;
  tm.reserve(modes.size());
  for (const auto& m : modes) tm.push_back(tracked_coefficient(truth, m, model));
  truth_modes.push_back(std::move(tm));

  std::vector<std::vector<std::complex<double>>> mm(static_cast<std::size_t>(members_tracked));
  for (int k = 0; k < members_tracked; ++k) {
    for (const auto& m : modes) {
      mm[static_cast<std::size_t>(k)].push_back(
          tracked_coefficient(ensemble.member(static_cast<std::size_t>(k)), m, model));
    }
  }
  member_modes.push_back(std::move(mm));
}

double ErrorSeries::tail_mean(const std::vector<double>& values, std::size_t first) {
  if (first >= values.size()) throw std::invalid_argument("tail_mean: empty tail");
  double s = 0.0;
  for (std::size_t i = first; i < values.size(); ++i) s += values[i];
  return s / static_cast<double>(values.size() - first);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string mode_tag(const Wavevector& m) {
  return std::to_string(m.m1) + "_" + std::to_string(m.m2);
}

}  // namespace

void write_series_csv(std::ostream& out, const ErrorSeries& s) {
  const auto old_precision = out.precision(17);
  out << "step";
  if (s.continuous) out << ",substep";
  out << ",time,rel_err_mean";
  if (s.continuous) out << ",rel_err_member1";
  out << ",mean_member_mse,spread";
  for (const auto& m : s.modes) {
    out << ',' << csv_field("truth_re_" + mode_tag(m)) << ','
        << csv_field("truth_im_" + mode_tag(m));
  }
  for (int k = 0; k < s.members_tracked; ++k) {
    const std::string p = "member" + std::to_string(k + 1);
    for (const auto& m : s.modes) {
      out << ',' << csv_field(p + "_re_" + mode_tag(m)) << ','
          << csv_field(p + "_im_" + mode_tag(m));
    }
  }
  out << '\n';
  for (std::size_t r = 0; r < s.size(); ++r) {
    out << s.step[r];
    if (s.continuous) out << ',' << s.substep[r];
    out << ',' << s.time[r] << ',' << s.rel_err_mean[r];
    if (s.continuous) out << ',' << s.rel_err_member1[r];
    out << ',' << s.mean_member_mse[r] << ',' << s.spread[r];
    for (const auto& c : s.truth_modes[r]) out << ',' << c.real() << ',' << c.imag();
    for (const auto& member : s.member_modes[r]) {
      for (const auto& c : member) out << ',' << c.real() << ',' << c.imag();
    }
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace enkf
