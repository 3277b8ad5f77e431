#include "enkf/continuous_filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "enkf/errors.hpp"

namespace enkf {

namespace {

long exact_ratio(double a, double b, const char* what) {
  const double r = a / b;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - static_cast<double>(n)) > 1e-9 * std::max(1.0, r)) {
    throw std::invalid_argument(what);
  }
  return n;
}

}  // namespace

long ContinuousConfig::substeps() const {
  if (!(dt > 0.0)) throw std::invalid_argument("continuous filter: dt must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("continuous filter: T must be positive");
  return exact_ratio(T, dt, "continuous filter: T must be a multiple of dt");
}

NoiseIncrements draw_increments(std::size_t members, Eigen::Index dim, double dt,
                                std::uint64_t step_index, std::uint64_t master) {
  const double s = std::sqrt(dt);
  NoiseIncrements n;
  n.member.reserve(members);
  for (std::size_t k = 0; k < members; ++k) {
    RngStream rng(master, Purpose::MemberNoise, k, step_index);
    n.member.push_back(s * rng.normal_vector(dim));
  }
  RngStream shared(master, Purpose::SharedNoise, 0, step_index);
  n.shared = s * shared.normal_vector(dim);
  return n;
}

Ensemble nudge_noise_update(const Ensemble& ensemble, const StateVector& u_true, double dt,
                            double gamma, double alpha_sq, const ObservationMask& mask,
                            bool inflate_noise, const NoiseIncrements& noise) {
  require_compatible(ensemble.mean(), u_true, "nudge_noise_substep");
  if (!(gamma > 0.0)) throw std::invalid_argument("nudge_noise_substep: gamma must be positive");
  if (!(alpha_sq >= 0.0)) throw std::invalid_argument("nudge_noise_substep: alpha_sq must be >= 0");
  if (mask.dim() != ensemble.dim()) {
    throw std::invalid_argument("nudge_noise_substep: observation operator dimension mismatch");
  }
  if (noise.member.size() != ensemble.size() || noise.shared.size() != ensemble.dim()) {
    throw std::invalid_argument("nudge_noise_substep: increments do not match the ensemble");
  }
  for (const auto& w : noise.member) {
    if (w.size() != ensemble.dim()) {
      throw std::invalid_argument("nudge_noise_substep: increment dimension mismatch");
    }
  }
  const Eigen::MatrixXd& d = ensemble.deviations();
  const auto k_count = static_cast<Eigen::Index>(ensemble.size());
  const Eigen::Index dim = ensemble.dim();
  const Eigen::VectorXd& h = mask.weights();
  // Columns: H (v^(k) - u) and H (dW^(k) + dB).
  Eigen::MatrixXd innov(dim, k_count);
  Eigen::MatrixXd dw(dim, k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    innov.col(k) = h.cwiseProduct(ensemble.member(ks).data - u_true.data);
    dw.col(k) = h.cwiseProduct(noise.member[ks] + noise.shared);
  }
  const double drift = dt / (gamma * gamma);
  const double alpha_noise = inflate_noise ? alpha_sq : 0.0;
  // (alpha^2 I + D D^T) applied to both blocks at once.
  const Eigen::MatrixXd combined = -drift * innov + dw / gamma;
  Eigen::MatrixXd update = d * (d.transpose() * combined);
  if (alpha_sq != 0.0) update -= drift * alpha_sq * innov;
  if (alpha_noise != 0.0) update += (alpha_noise / gamma) * dw;

  std::vector<StateVector> out;
  out.reserve(ensemble.size());
  for (Eigen::Index k = 0; k < k_count; ++k) {
    out.emplace_back(ensemble.kind(),
                     ensemble.member(static_cast<std::size_t>(k)).data + update.col(k));
  }
  return Ensemble(std::move(out));
}

Ensemble nudge_noise_substep(const Ensemble& ensemble, const StateVector& u_true,
                             const ContinuousConfig& cfg, std::uint64_t step_index,
                             std::uint64_t master) {
  const NoiseIncrements noise =
      draw_increments(ensemble.size(), ensemble.dim(), cfg.dt, step_index, master);
  return nudge_noise_update(ensemble, u_true, cfg.dt, cfg.gamma, cfg.alpha_sq, cfg.mask,
                            cfg.inflate_noise, noise);
}

FilterRun run_continuous_filter(const Dynamics& model, const ContinuousConfig& cfg,
                                const StateVector& u0, const Ensemble& initial) {
  const long n_steps = cfg.substeps();
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("continuous filter: gamma must be positive");
  if (!(cfg.alpha_sq >= 0.0)) throw std::invalid_argument("continuous filter: alpha_sq must be >= 0");
  if (cfg.record_stride < 1) throw std::invalid_argument("continuous filter: record_stride must be >= 1");
  if (cfg.mask.kind() != model.kind() || cfg.mask.dim() != model.dim()) {
    throw std::invalid_argument("continuous filter: observation operator does not match the model");
  }
  require_compatible(u0, model.zero_state(), "continuous filter truth");
  require_compatible(initial.mean(), model.zero_state(), "continuous filter ensemble");

  FilterRun run{ErrorSeries{}, initial, cfg.seed};
  run.series.continuous = true;
  run.series.record(0, 0, 0.0, initial, u0, model, cfg.series);
  StateVector u = u0;
  for (long n = 1; n <= n_steps; ++n) {
    u = model.step(u, cfg.dt);
    const Ensemble pred = predict(run.final_ensemble, model, cfg.dt);
    run.final_ensemble = nudge_noise_substep(pred, u, cfg, static_cast<std::uint64_t>(n), cfg.seed);
    if (n % cfg.record_stride == 0 || n == n_steps) {
      run.series.record(n / cfg.record_stride, n, static_cast<double>(n) * cfg.dt,
                        run.final_ensemble, u, model, cfg.series);
    }
  }
  return run;
}

FilterRun run_continuous_filter(const Dynamics& model, const ContinuousConfig& cfg,
                                const StateVector& u0, const EnsembleInit& init,
                                int ensemble_size) {
  return run_continuous_filter(model, cfg, u0,
                               draw_initial_ensemble(model, init, u0, ensemble_size, cfg.seed));
}

void validate_convergence_config(const ConvergenceConfig& cfg) {
  if (cfg.h_list.empty()) throw std::invalid_argument("convergence: empty h list");
  if (!(cfg.gamma0 > 0.0)) throw std::invalid_argument("convergence: gamma0 must be positive");
  if (!(cfg.alpha_sq >= 0.0)) throw std::invalid_argument("convergence: alpha_sq must be >= 0");
  if (cfg.n_mc < 2) throw std::invalid_argument("convergence: n_mc must be >= 2");
  if (cfg.ensemble_size < 1) throw std::invalid_argument("convergence: ensemble_size must be >= 1");
  if (cfg.refine < 1) throw std::invalid_argument("convergence: refine must be >= 1");
  for (std::size_t i = 0; i < cfg.h_list.size(); ++i) {
    if (!(cfg.h_list[i] > 0.0)) throw std::invalid_argument("convergence: h must be positive");
    if (i > 0 && !(cfg.h_list[i] < cfg.h_list[i - 1])) {
      throw std::invalid_argument("convergence: h list must be strictly decreasing");
    }
  }
  const double dt_ref = cfg.h_list.back() / cfg.refine;
  for (double h : cfg.h_list) {
    exact_ratio(h, dt_ref, "convergence: h list has no common refinement");
    exact_ratio(cfg.T, h, "convergence: T must be a multiple of every h");
  }
}

std::vector<ConvergenceRow> convergence_experiment(const Dynamics& model,
                                                   const ConvergenceConfig& cfg) {
  validate_convergence_config(cfg);
  const double dt_ref = cfg.h_list.back() / cfg.refine;
  const long n_ref = exact_ratio(cfg.T, dt_ref, "convergence: T must be a multiple of the reference step");
  const ObservationMask mask = bind_observation(ObservationOperator::identity(), model);
  const auto k_count = static_cast<std::size_t>(cfg.ensemble_size);
  const Eigen::Index dim = model.dim();

  std::vector<std::vector<double>> samples(cfg.h_list.size());
  for (int r = 0; r < cfg.n_mc; ++r) {
    const std::uint64_t rseed = derive_seed(cfg.seed, Purpose::Replica, static_cast<std::uint64_t>(r));
    const StateVector u0 = draw_truth_initial(model, cfg.spin_up, rseed);
    const Ensemble initial = draw_initial_ensemble(model, cfg.init, u0, cfg.ensemble_size, rseed);

    std::vector<StateVector> truth;
    truth.reserve(static_cast<std::size_t>(n_ref) + 1);
    truth.push_back(u0);
    std::vector<NoiseIncrements> inc;
    inc.reserve(static_cast<std::size_t>(n_ref));
    for (long n = 1; n <= n_ref; ++n) {
      truth.push_back(model.step(truth.back(), dt_ref));
      inc.push_back(draw_increments(k_count, dim, dt_ref, static_cast<std::uint64_t>(n), rseed));
    }

    Ensemble cts = initial;
    for (long n = 1; n <= n_ref; ++n) {
      cts = nudge_noise_update(predict(cts, model, dt_ref), truth[static_cast<std::size_t>(n)],
                               dt_ref, cfg.gamma0, cfg.alpha_sq, mask, true,
                               inc[static_cast<std::size_t>(n - 1)]);
    }

    for (std::size_t hi = 0; hi < cfg.h_list.size(); ++hi) {
      const double h = cfg.h_list[hi];
      const long block = exact_ratio(h, dt_ref, "convergence: h list has no common refinement");
      const double gamma = cfg.gamma0 / std::sqrt(h);
      const AnalysisConfig acfg{gamma, cfg.alpha_sq, mask};
      Ensemble disc = initial;
      for (long n0 = 0; n0 < n_ref; n0 += block) {
        NoiseIncrements sum{std::vector<Eigen::VectorXd>(k_count, Eigen::VectorXd::Zero(dim)),
                            Eigen::VectorXd::Zero(dim)};
        for (long n = n0; n < n0 + block; ++n) {
          const auto& b = inc[static_cast<std::size_t>(n)];
          for (std::size_t k = 0; k < k_count; ++k) sum.member[k] += b.member[k];
          sum.shared += b.shared;
        }
        const StateVector& u_next = truth[static_cast<std::size_t>(n0 + block)];
        // y^(k) = H u + (gamma0 / h)(dW^(k) + dB), i.e. Gamma^{1/2}(xi + xi^(k)) with
        // Gamma = gamma0^2 / h.
        std::vector<StateVector> y;
        y.reserve(k_count);
        for (std::size_t k = 0; k < k_count; ++k) {
          y.emplace_back(model.kind(),
                         u_next.data + (cfg.gamma0 / h) * (sum.member[k] + sum.shared));
        }
        disc = analyze_with_observations(predict(disc, model, h), y, acfg);
      }
      double sq = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        sq += (disc.member(k).data - cts.member(k).data).squaredNorm();
      }
      sq /= static_cast<double>(k_count);
      if (!std::isfinite(sq)) throw NumericalFailure("convergence: non-finite discrepancy");
      samples[hi].push_back(sq);
    }
  }

  std::vector<ConvergenceRow> rows;
  for (std::size_t hi = 0; hi < cfg.h_list.size(); ++hi) {
    const auto& s = samples[hi];
    double mean = 0.0;
    for (double x : s) mean += x;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (double x : s) var += (x - mean) * (x - mean);
    var /= static_cast<double>(s.size() - 1);
    rows.push_back({cfg.h_list[hi], mean, std::sqrt(var / static_cast<double>(s.size()))});
  }
  return rows;
}

}  // namespace enkf
