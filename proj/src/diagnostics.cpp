#include "enkf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "enkf/errors.hpp"

namespace enkf {

double theta(double gamma, double alpha_sq, double beta_hat, double h) {
  const double g2 = gamma * gamma;
  return g2 / (g2 + alpha_sq) * std::exp(2.0 * beta_hat * h);
}

double relative_error(const StateVector& m, const StateVector& u) {
  require_compatible(m, u, "relative_error");
  const double un = u.norm();
  if (!(un > 0.0)) throw std::invalid_argument("relative_error: truth has zero norm");
  return (m.data - u.data).norm() / un;
}

McStat mc_stat(const std::vector<double>& samples) {
  McStat s;
  s.count = samples.size();
  if (samples.empty()) return s;
  KahanSum sum;
  for (double x : samples) sum.add(x);
  s.mean = sum.value() / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    KahanSum var;
    for (double x : samples) var.add((x - s.mean) * (x - s.mean));
    s.std_err = std::sqrt(var.value() / static_cast<double>(samples.size() - 1) /
                          static_cast<double>(samples.size()));
  }
  return s;
}

double envelope_disc(double beta_hat, double h, int K, double gamma, double e0, long j) {
  const double x = 2.0 * beta_hat * h;
  const double jd = static_cast<double>(j);
  const double growth = std::exp(x * jd);
  const double series = std::abs(x) < 1e-12 ? jd : std::expm1(x * jd) / std::expm1(x);
  return growth * e0 + 2.0 * K * gamma * gamma * series;
}

double envelope_varinf(double theta_value, int K, double gamma, double e0, long j) {
  if (!(theta_value < 1.0)) throw std::invalid_argument("envelope_varinf: theta must be < 1");
  const double tj = std::pow(theta_value, static_cast<double>(j));
  return tj * e0 + 2.0 * K * gamma * gamma * (1.0 - tj) / (1.0 - theta_value);
}

void validate_theorem_params(const TheoremParams& p) {
  if (p.observation.kind != ObservationOperator::Kind::identity) {
    throw ConfigError("theorem checks require full observation (observation = identity)");
  }
  if (!(p.h > 0.0)) throw ConfigError("h must be positive");
  if (!(p.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(p.alpha_sq >= 0.0)) throw ConfigError("alpha_sq must be >= 0");
  if (p.ensemble_size < 2) throw ConfigError("ensemble_size must be >= 2");
  if (p.n_mc < 2) throw ConfigError("n_mc must be >= 2");
  if (p.steps < 1) throw ConfigError("steps must be >= 1");
  if (p.tracked_member < 0 || p.tracked_member >= p.ensemble_size) {
    throw ConfigError("tracked_member must index an ensemble member");
  }
  if (p.tail_steps < 1) throw ConfigError("tail_steps must be >= 1");
  if (p.dt_list.empty()) throw ConfigError("dt_list must not be empty");
  for (double dt : p.dt_list) {
    if (!(dt > 0.0)) throw ConfigError("dt_list entries must be positive");
  }
  if (!(p.T > 0.0)) throw ConfigError("T must be positive");
  if (!(p.record_interval > 0.0)) throw ConfigError("record_interval must be positive");
  if (!(p.fit_start >= 0.0 && p.fit_start < 1.0)) throw ConfigError("fit_start must lie in [0, 1)");
}

double estimate_beta(const Dynamics& model, const TheoremParams& p) {
  if (std::isfinite(p.beta_hat)) return p.beta_hat;
  const StateVector u0 = draw_truth_initial(model, p.spin_up, derive_seed(p.seed, Purpose::GrowthProbe));
  const AttractorSample samples =
      collect_attractor_samples(model, u0, 0.0, p.growth_stride, p.growth_samples);
  RngStream rng(p.seed, Purpose::GrowthProbe, 1);
  return estimate_growth_rate(model, p.h, samples, p.growth_eps, rng, p.growth_directions);
}

namespace {

// Per-replica squared error |e_j^(k)|^2 of the tracked member, j = 0..steps.
struct DiscreteSamples {
  std::vector<std::vector<double>> by_step;  // [j][replica]
  int divergent = 0;
};

DiscreteSamples run_replicas(const Dynamics& model, const TheoremParams& p, double alpha_sq) {
  const ObservationMask mask = bind_observation(p.observation, model);
  DiscreteSamples out;
  out.by_step.resize(static_cast<std::size_t>(p.steps) + 1);
  for (int r = 0; r < p.n_mc; ++r) {
    const std::uint64_t rseed = derive_seed(p.seed, Purpose::Replica, static_cast<std::uint64_t>(r));
    try {
      const StateVector u0 = draw_truth_initial(model, p.spin_up, rseed);
      const TruthRun truth = generate_truth(model, mask, u0, p.h, p.steps, p.gamma, rseed);
      FilterConfig cfg;
      cfg.ensemble_size = p.ensemble_size;
      cfg.gamma = p.gamma;
      cfg.alpha_sq = alpha_sq;
      cfg.mask = mask;
      cfg.seed = rseed;
      cfg.series.tracked_members = 0;
      const FilterRun run = run_discrete_filter(model, cfg, truth, p.init);
      for (std::size_t j = 0; j < out.by_step.size(); ++j) {
        out.by_step[j].push_back(
            run.series.member_sq_err[j][static_cast<std::size_t>(p.tracked_member)]);
      }
    } catch (const NumericalFailure&) {
      ++out.divergent;
    }
  }
  return out;
}

void fill_rows(BoundReport& rep, const std::vector<McStat>& stats, double h,
               const std::vector<double>& envelope) {
  rep.rows.clear();
  bool ok = true;
  for (std::size_t j = 0; j < stats.size(); ++j) {
    BoundRow row;
    row.series = rep.theorem;
    row.step = static_cast<long>(j);
    row.time = static_cast<double>(j) * h;
    row.mc_mean = stats[j].mean;
    row.halfwidth = 2.0 * stats[j].std_err;
    row.envelope = envelope[j];
    row.pass = row.mc_mean - row.halfwidth <= row.envelope;
    ok = ok && row.pass;
    rep.rows.push_back(row);
  }
  rep.passed = ok && rep.divergent == 0;
}

bool dominated(const std::vector<McStat>& stats, const std::vector<double>& envelope) {
  for (std::size_t j = 0; j < stats.size(); ++j) {
    if (stats[j].mean - 2.0 * stats[j].std_err > envelope[j]) return false;
  }
  return true;
}

constexpr double kMultipliers[] = {1.0, 1.5, 2.0};

}  // namespace

BoundReport check_theorem_disc(const Dynamics& model, const TheoremParams& p) {
  validate_theorem_params(p);
  BoundReport rep;
  rep.theorem = "disc";
  rep.beta_hat = estimate_beta(model, p);
  rep.theta_hat = theta(p.gamma, p.alpha_sq, rep.beta_hat, p.h);
  rep.ensemble_size = p.ensemble_size;
  rep.gamma = p.gamma;
  rep.alpha_sq = p.alpha_sq;
  rep.h = p.h;
  rep.n_mc = p.n_mc;

  const DiscreteSamples s = run_replicas(model, p, p.alpha_sq);
  rep.divergent = s.divergent;
  std::vector<McStat> stats;
  for (const auto& v : s.by_step) stats.push_back(mc_stat(v));
  const double e0 = stats.front().mean;

  auto envelope_for = [&](double beta) {
    std::vector<double> env;
    for (std::size_t j = 0; j < stats.size(); ++j) {
      env.push_back(envelope_disc(beta, p.h, p.ensemble_size, p.gamma, e0, static_cast<long>(j)));
    }
    return env;
  };
  fill_rows(rep, stats, p.h, envelope_for(rep.beta_hat));
  for (double m : kMultipliers) {
    const double b = m * rep.beta_hat;
    rep.sensitivity.push_back({m, b, theta(p.gamma, p.alpha_sq, b, p.h),
                               dominated(stats, envelope_for(b)) && s.divergent == 0});
  }
  return rep;
}

BoundReport check_theorem_varinf(const Dynamics& model, const TheoremParams& p) {
  validate_theorem_params(p);
  BoundReport rep;
  rep.theorem = "varinf";
  rep.beta_hat = estimate_beta(model, p);
  double alpha_sq = p.alpha_sq;
  if (alpha_sq <= 0.0 && p.theta_target > 0.0) {
    alpha_sq = p.gamma * p.gamma * (std::exp(2.0 * rep.beta_hat * p.h) / p.theta_target - 1.0);
    alpha_sq = std::max(alpha_sq, 0.0);
  }
  rep.theta_hat = theta(p.gamma, alpha_sq, rep.beta_hat, p.h);
  if (!(rep.theta_hat < 1.0)) {
    const double need = p.gamma * p.gamma * (std::exp(2.0 * rep.beta_hat * p.h) - 1.0);
    std::ostringstream msg;
    msg << "theta = " << rep.theta_hat << " >= 1; raise alpha_sq above " << need;
    throw ConfigError(msg.str());
  }
  if (p.tail_steps > p.steps) throw ConfigError("tail_steps must not exceed steps");
  rep.ensemble_size = p.ensemble_size;
  rep.gamma = p.gamma;
  rep.alpha_sq = alpha_sq;
  rep.h = p.h;
  rep.n_mc = p.n_mc;

  const DiscreteSamples s = run_replicas(model, p, alpha_sq);
  rep.divergent = s.divergent;
  std::vector<McStat> stats;
  for (const auto& v : s.by_step) stats.push_back(mc_stat(v));
  const double e0 = stats.front().mean;

  auto envelope_for = [&](double th) {
    std::vector<double> env;
    for (std::size_t j = 0; j < stats.size(); ++j) {
      env.push_back(envelope_varinf(th, p.ensemble_size, p.gamma, e0, static_cast<long>(j)));
    }
    return env;
  };
  fill_rows(rep, stats, p.h, envelope_for(rep.theta_hat));

  // Long-run level: per-replica time average over the final tail_steps steps.
  const std::size_t n_rep = s.by_step.front().size();
  std::vector<double> tail(n_rep, 0.0);
  const std::size_t first = s.by_step.size() - static_cast<std::size_t>(p.tail_steps);
  for (std::size_t r = 0; r < n_rep; ++r) {
    KahanSum acc;
    for (std::size_t j = first; j < s.by_step.size(); ++j) acc.add(s.by_step[j][r]);
    tail[r] = acc.value() / static_cast<double>(p.tail_steps);
  }
  rep.tail = mc_stat(tail);
  rep.asymptote = 2.0 * p.ensemble_size * p.gamma * p.gamma / (1.0 - rep.theta_hat);
  rep.asymptote_pass = rep.tail.mean <= rep.asymptote + 2.0 * rep.tail.std_err;
  rep.passed = rep.passed && rep.asymptote_pass;

  for (double m : kMultipliers) {
    const double b = m * rep.beta_hat;
    const double th = theta(p.gamma, alpha_sq, b, p.h);
    rep.sensitivity.push_back({m, b, th, th < 1.0 && dominated(stats, envelope_for(th)) &&
                                             s.divergent == 0});
  }
  return rep;
}

BoundReport check_theorem_cts(const Dynamics& model, const TheoremParams& p) {
  validate_theorem_params(p);
  BoundReport rep;
  rep.theorem = "cts";
  rep.ensemble_size = p.ensemble_size;
  rep.gamma = p.gamma;
  rep.alpha_sq = p.alpha_sq;
  rep.n_mc = p.n_mc;
  rep.h = p.dt_list.front();
  const ObservationMask mask = bind_observation(p.observation, model);

  bool rows_ok = true;
  for (double dt : p.dt_list) {
    ContinuousConfig cfg;
    cfg.dt = dt;
    cfg.gamma = p.gamma;
    cfg.alpha_sq = p.alpha_sq;
    cfg.mask = mask;
    cfg.T = p.T;
    cfg.series.tracked_members = 0;
    const long stride = std::lround(p.record_interval / dt);
    if (stride < 1 || std::abs(static_cast<double>(stride) * dt - p.record_interval) >
                          1e-9 * p.record_interval) {
      throw ConfigError("record_interval must be a multiple of every dt");
    }
    cfg.record_stride = static_cast<int>(stride);
    const long n_steps = cfg.substeps();
    if (n_steps % stride != 0) throw ConfigError("T must be a multiple of record_interval");
    const std::size_t n_rec = static_cast<std::size_t>(n_steps / stride) + 1;

    std::vector<std::vector<double>> curve(n_rec);
    for (int r = 0; r < p.n_mc; ++r) {
      const std::uint64_t rseed =
          derive_seed(p.seed, Purpose::Replica, static_cast<std::uint64_t>(r));
      cfg.seed = rseed;
      try {
        const StateVector u0 = draw_truth_initial(model, p.spin_up, rseed);
        const FilterRun run = run_continuous_filter(model, cfg, u0, p.init, p.ensemble_size);
        for (std::size_t i = 0; i < n_rec; ++i) curve[i].push_back(run.series.mean_member_mse[i]);
      } catch (const NumericalFailure&) {
        ++rep.divergent;
      }
    }
    std::vector<McStat> stats;
    for (const auto& c : curve) stats.push_back(mc_stat(c));

    const double e0 = stats.front().mean;
    const std::size_t first =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p.fit_start * static_cast<double>(n_rec - 1) - 1e-9)));
    double rho = 0.0;
    if (e0 > 0.0) {
      rho = -std::numeric_limits<double>::infinity();
      for (std::size_t i = first; i < n_rec; ++i) {
        const double t = static_cast<double>(i) * p.record_interval;
        rho = std::max(rho, std::log(stats[i].mean / e0) / t);
      }
    }
    KahanSum integral;
    for (std::size_t i = 1; i < n_rec; ++i) {
      integral.add(0.5 * (stats[i - 1].mean + stats[i].mean) * p.record_interval);
    }

    std::ostringstream label;
    label << "dt=" << dt;
    for (std::size_t i = 0; i < n_rec; ++i) {
      if (i != 0 && i < first) continue;
      BoundRow row;
      row.series = label.str();
      row.step = static_cast<long>(i) * stride;
      row.time = static_cast<double>(i) * p.record_interval;
      row.mc_mean = stats[i].mean;
      row.halfwidth = 2.0 * stats[i].std_err;
      row.envelope = e0 * std::exp(rho * row.time);
      row.pass = row.mc_mean - row.halfwidth <= row.envelope * (1.0 + 1e-12);
      rows_ok = rows_ok && row.pass;
      rep.rows.push_back(row);
    }
    rep.dts.push_back(dt);
    rep.rho.push_back(rho);
    rep.integral.push_back(integral.value());
  }

  bool finite = true;
  for (std::size_t i = 0; i < rep.rho.size(); ++i) {
    finite = finite && std::isfinite(rep.rho[i]) && std::isfinite(rep.integral[i]);
  }
  rep.rho_stable = finite;
  if (finite) {
    for (std::size_t i = 1; i < rep.rho.size(); ++i) {
      const double scale = std::max(std::abs(rep.rho[0]), std::abs(rep.rho[i]));
      if (std::abs(rep.rho[0] - rep.rho[i]) > p.rho_tolerance * scale) rep.rho_stable = false;
    }
  }
  rep.passed = rows_ok && rep.rho_stable && rep.divergent == 0;
  return rep;
}

void write_bound_csv(std::ostream& out, const BoundReport& report) {
  const auto old = out.precision(17);
  out << "series,step,time,mc_mean,halfwidth,envelope,pass\n";
  for (const auto& r : report.rows) {
    out << csv_field(r.series) << ',' << r.step << ',' << r.time << ',' << r.mc_mean << ','
        << r.halfwidth << ',' << r.envelope << ',' << (r.pass ? 1 : 0) << '\n';
  }
  out.precision(old);
}

void write_bound_summary(std::ostream& out, const BoundReport& r) {
  const auto old = out.precision(17);
  out << "theorem=" << r.theorem << '\n'
      << "passed=" << (r.passed ? 1 : 0) << '\n'
      << "beta_hat=" << r.beta_hat << '\n'
      << "theta_hat=" << r.theta_hat << '\n'
      << "ensemble_size=" << r.ensemble_size << '\n'
      << "gamma=" << r.gamma << '\n'
      << "alpha_sq=" << r.alpha_sq << '\n'
      << "h=" << r.h << '\n'
      << "n_mc=" << r.n_mc << '\n'
      << "divergent=" << r.divergent << '\n';
  if (r.theorem == "varinf") {
    out << "asymptote=" << r.asymptote << '\n'
        << "tail_mean=" << r.tail.mean << '\n'
        << "tail_std_err=" << r.tail.std_err << '\n'
        << "asymptote_pass=" << (r.asymptote_pass ? 1 : 0) << '\n';
  }
  for (std::size_t i = 0; i < r.dts.size(); ++i) {
    out << "rho[dt=" << r.dts[i] << "]=" << r.rho[i] << '\n'
        << "integral[dt=" << r.dts[i] << "]=" << r.integral[i] << '\n';
  }
  if (!r.dts.empty()) out << "rho_stable=" << (r.rho_stable ? 1 : 0) << '\n';
  for (const auto& s : r.sensitivity) {
    out << "sensitivity[" << s.beta_multiplier << "]=beta:" << s.beta << ";theta:" << s.theta
        << ";pass:" << (s.pass ? 1 : 0) << '\n';
  }
  out.precision(old);
}

}  // namespace enkf
