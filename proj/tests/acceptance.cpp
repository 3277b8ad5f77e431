// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance_tests [name ...]    (no names: run everything)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "enkf/analysis.hpp"
#include "enkf/continuous_filter.hpp"
#include "enkf/diagnostics.hpp"
#include "enkf/experiment.hpp"
#include "enkf/gaussian_field.hpp"
#include "enkf/navier_stokes.hpp"
#include "enkf/rml.hpp"

using namespace enkf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::shared_ptr<NavierStokes2D> nse(bool nonlinear, double f_amp, double dt = 0.005) {
  auto spec = ModelSpec::defaults(ModelKind::nse2d);
  spec.nse.nonlinear = nonlinear;
  spec.nse.f_amp = f_amp;
  spec.dt_internal = dt;
  return std::make_shared<NavierStokes2D>(spec);
}

Outcome bilinear_identity() {
  const auto m = nse(true, 10.0);
  RngStream rng(1, Purpose::Test);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const StateVector u = sample_gaussian_field(GaussianFieldLaw::white(1.0), *m->layout(), rng);
    const double n = u.norm();
    worst = std::max(worst, std::abs(dot(m->bilinear_form(u, u), u)) / (n * n * n));
  }
  return {worst < 1e-10, fmt("max |<B(u,u),u>|/|u|^3 = %.3e", worst)};
}

Outcome stokes_decay() {
  const auto m = nse(false, 0.0);
  const SpectralLayout& l = *m->layout();
  RngStream rng(2, Purpose::Test);
  const StateVector u0 = sample_gaussian_field(GaussianFieldLaw::white(1.0), l, rng);
  const double h = 0.1;
  const int steps = 100;
  StateVector u = u0;
  double worst = 0.0;
  for (int s = 1; s <= steps; ++s) {
    u = m->step(u, h);
    for (std::size_t i = 0; i < l.num_modes(); ++i) {
      const double decay = std::exp(-0.01 * l.wavenumber_sq(i) * h * s);
      for (int c = 0; c < 2; ++c) {
        const auto idx = static_cast<Eigen::Index>(2 * i + c);
        const double expected = decay * u0.data(idx);
        if (expected != 0.0) worst = std::max(worst, std::abs(u.data(idx) / expected - 1.0));
      }
    }
  }
  return {worst < 1e-12, fmt("max relative mode error = %.3e over %d steps", worst, steps)};
}

Outcome etd4rk_order() {
  const StateVector u0 = draw_truth_initial(*nse(true, 10.0), 20.0, 1);
  const double T = 1.0;
  const StateVector ref = nse(true, 10.0, 0.000625)->step(u0, T);
  const std::vector<double> dts{0.01, 0.005, 0.0025};
  std::vector<double> err;
  for (double dt : dts) err.push_back((nse(true, 10.0, dt)->step(u0, T) - ref).norm() / ref.norm());
  double order = 1e300;
  std::string d;
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double p = std::log2(err[i - 1] / err[i]);
    order = std::min(order, p);
    d += fmt("%sp(%g/%g)=%.2f", i > 1 ? ", " : "", dts[i - 1], dts[i], p);
  }
  return {order >= 3.5, fmt("errors %.2e %.2e %.2e; ", err[0], err[1], err[2]) + d};
}

Outcome rml_moments() {
  const int dim = 5;
  const int n = 100000;
  RngStream rng(4, Purpose::Test);
  RmlProblem p;
  p.prior_mean = rng.normal_vector(dim);
  p.prior_factor = Eigen::MatrixXd::Identity(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) p.prior_factor(i, j) += 0.3 * rng.normal();
  p.forward = Eigen::MatrixXd(3, dim);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < dim; ++j) p.forward(i, j) = rng.normal();
  p.gamma = 0.5;
  p.data = rng.normal_vector(3);

  const Eigen::MatrixXd prior_cov = p.prior_factor * p.prior_factor.transpose();
  const Eigen::MatrixXd prior_prec = prior_cov.inverse();
  const double g2 = p.gamma * p.gamma;
  const Eigen::MatrixXd post_cov = (prior_prec + p.forward.transpose() * p.forward / g2).inverse();
  const Eigen::VectorXd post_mean =
      post_cov * (prior_prec * p.prior_mean + p.forward.transpose() * p.data / g2);

  RngStream draws(5, Purpose::Test);
  const auto samples = rml_sample(p, n, draws);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& s : samples) mean += s;
  mean /= n;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : samples) cov += (s - mean) * (s - mean).transpose();
  cov /= n - 1;

  const double mean_tol = 5.0 * std::sqrt(post_cov.trace()) / std::sqrt(double(n));
  const double mean_err = (mean - post_mean).cwiseAbs().maxCoeff();
  const double cov_err = (cov - post_cov).norm() / post_cov.norm();
  return {mean_err < mean_tol && cov_err < 0.02,
          fmt("max mean error %.2e (tol %.2e), covariance error %.2f%%", mean_err, mean_tol,
              100 * cov_err)};
}

Outcome analysis_oracle() {
  RngStream rng(6, Purpose::Test);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 1 + static_cast<int>(rng.uniform() * 8);
    const int K = 2 + static_cast<int>(rng.uniform() * 5);
    const double alpha_sq = trial % 2 ? 0.01 : 0.0;
    const double gamma = 0.05 + rng.uniform();
    Eigen::VectorXd h = Eigen::VectorXd::Ones(dim);
    if (trial % 4 >= 2) {
      for (int i = 0; i < dim; ++i) h(i) = rng.uniform() < 0.5 ? 0.0 : 1.0;
    }
    std::vector<StateVector> members, obs;
    for (int k = 0; k < K; ++k) {
      members.push_back({ModelKind::linear, rng.normal_vector(dim)});
      obs.push_back({ModelKind::linear, rng.normal_vector(dim)});
    }
    const Ensemble pred(members);
    AnalysisConfig cfg;
    cfg.gamma = gamma;
    cfg.alpha_sq = alpha_sq;
    cfg.mask = ObservationMask(ModelKind::linear, h);
    const Ensemble out = analyze_with_observations(pred, obs, cfg);

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (const auto& m : members) mean += m.data;
    mean /= K;
    Eigen::MatrixXd c = alpha_sq * Eigen::MatrixXd::Identity(dim, dim);
    for (const auto& m : members) c += (m.data - mean) * (m.data - mean).transpose() / K;
    const double ig = 1.0 / (gamma * gamma);
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim, dim) + c * h.asDiagonal() * ig;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXd rhs = members[k].data + c * h.cwiseProduct(obs[k].data) * ig;
      const Eigen::VectorXd v = lu.solve(rhs);
      worst = std::max(worst, (out.member(k).data - v).norm() / v.norm());
    }
  }
  return {worst < 1e-10, fmt("max relative difference %.2e over 1000 instances", worst)};
}

double worst_margin(const BoundReport& r) {
  double m = -1e300;
  for (const auto& row : r.rows) m = std::max(m, row.mc_mean - row.halfwidth - row.envelope);
  return m;
}

const std::shared_ptr<const Dynamics>& lorenz63() {
  static const auto m = make_dynamics(ModelSpec::defaults(ModelKind::lorenz63));
  return m;
}

Outcome disc_envelope() {
  TheoremParams p;
  const BoundReport r = check_theorem_disc(*lorenz63(), p);
  return {r.passed, fmt("beta_hat %.3f, max (mean - 2SE - envelope) %.3e, divergent %d", r.beta_hat,
                        worst_margin(r), r.divergent)};
}

Outcome varinf_envelope() {
  TheoremParams p;
  p.steps = 200;
  p.tail_steps = 60;
  const BoundReport r = check_theorem_varinf(*lorenz63(), p);
  return {r.passed && r.theta_hat <= 0.5 + 1e-12,
          fmt("theta %.3f, alpha^2 %.3e, max (mean - 2SE - envelope) %.3e, tail %.3e +- %.1e vs "
              "asymptote %.3e",
              r.theta_hat, r.alpha_sq, worst_margin(r), r.tail.mean, r.tail.std_err, r.asymptote)};
}

Outcome cts_envelope() {
  TheoremParams p;
  p.gamma = 0.1;
  p.n_mc = 100;
  const BoundReport r = check_theorem_cts(*lorenz63(), p);
  return {r.passed, fmt("rho %.4f (dt %g), %.4f (dt %g), stable %d, divergent %d", r.rho[0], r.dts[0],
                        r.rho[1], r.dts[1], int(r.rho_stable), r.divergent)};
}

Outcome disc_cts_convergence() {
  const ConvergenceConfig cfg;
  const auto rows = convergence_experiment(*lorenz63(), cfg);
  bool ok = true;
  std::string d = "msd";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && !(rows[i].msd < rows[i - 1].msd)) ok = false;
    d += fmt(" h=%g: %.3e+-%.1e", rows[i].h, rows[i].msd, rows[i].std_err);
  }
  return {ok, d};
}

struct FigureRun {
  double tail = 0.0;      // final-half mean relative error
  double max_norm = 0.0;  // largest member norm over the run
  double bound = 0.0;     // attractor norm bound from the truth
};

FigureRun figure_run(Command cmd, const std::map<std::string, std::string>& keys) {
  Config c;
  for (const auto& [k, v] : keys) c.set(k, v, "acceptance");
  const ExperimentConfig e = resolve_experiment(cmd, c);
  const auto model = make_dynamics(e.model);
  const ObservationMask mask = bind_observation(e.observation, *model);
  const StateVector u0 = draw_truth_initial(*model, e.spin_up, e.seed);
  AttractorSample truth_states;
  ErrorSeries series;
  if (cmd == Command::run_discrete) {
    const TruthRun t = generate_truth(*model, mask, u0, e.h, e.n_obs, e.gamma, e.seed);
    FilterConfig fc;
    fc.ensemble_size = e.ensemble_size;
    fc.gamma = e.gamma;
    fc.alpha_sq = e.alpha_sq;
    fc.mask = mask;
    fc.seed = e.seed;
    fc.series = e.series;
    series = run_discrete_filter(*model, fc, t, e.ensemble_init(*model)).series;
    truth_states.states = t.states;
  } else {
    ContinuousConfig cc;
    cc.dt = e.model.dt_internal;
    cc.gamma = e.gamma;
    cc.alpha_sq = e.alpha_sq;
    cc.mask = mask;
    cc.T = e.T;
    cc.inflate_noise = e.inflate_noise;
    cc.record_stride = e.record_stride;
    cc.seed = e.seed;
    cc.series = e.series;
    series = run_continuous_filter(*model, cc, u0, e.ensemble_init(*model), e.ensemble_size).series;
    StateVector u = u0;
    truth_states.states.push_back(u);
    for (long n = 1; n <= cc.substeps(); ++n) {
      u = model->step(u, cc.dt);
      if (n % cc.record_stride == 0) truth_states.states.push_back(u);
    }
  }
  const auto& err = series.continuous ? series.rel_err_member1 : series.rel_err_mean;
  FigureRun r;
  r.tail = ErrorSeries::tail_mean(err, err.size() / 2);
  for (double x : series.max_member_norm) r.max_norm = std::max(r.max_norm, x);
  r.bound = attractor_norm_bound(truth_states);
  return r;
}

Outcome nse_full_obs() {
  const FigureRun free = figure_run(Command::run_discrete, {{"alpha_sq", "0"}});
  const FigureRun infl = figure_run(Command::run_discrete, {{"alpha_sq", "0.0025"}});
  const bool bounded = free.max_norm < 10.0 * free.bound;
  return {bounded && free.tail > 0.3 && infl.tail < 0.1,
          fmt("no inflation: tail error %.3f (> 0.3), max member norm %.2f vs 10 x bound %.2f; "
              "alpha^2=0.0025: tail error %.3f (< 0.1)",
              free.tail, free.max_norm, 10.0 * free.bound, infl.tail)};
}

Outcome nse_ring_obs() {
  const FigureRun p = figure_run(Command::run_discrete, {{"observation", "p_inside"}});
  const FigureRun q = figure_run(Command::run_discrete, {{"observation", "q_outside"}});
  return {p.tail < 0.2 && q.tail > 0.5,
          fmt("P_lambda tail error %.3f (< 0.2), Q_lambda tail error %.3f (> 0.5)", p.tail, q.tail)};
}

Outcome nse_continuous() {
  const FigureRun free = figure_run(Command::run_continuous, {{"alpha_sq", "0"}});
  const FigureRun full = figure_run(Command::run_continuous, {});
  const FigureRun p = figure_run(Command::run_continuous, {{"observation", "p_inside"}});
  const FigureRun q = figure_run(Command::run_continuous, {{"observation", "q_outside"}});
  const FigureRun drift = figure_run(Command::run_continuous, {{"inflate_noise", "false"}});
  std::printf("INFO  nse_continuous: drift-only inflation, full observation: tail error %.2e\n", drift.tail);
  const bool bounded = free.max_norm < 10.0 * free.bound;
  return {bounded && free.tail > 0.3 && full.tail < 0.1 && p.tail < 0.2 && q.tail > 0.5,
          fmt("no inflation: tail %.3f (> 0.3), max norm %.2f vs %.2f; alpha^2=0.00025: tail %.3f "
              "(< 0.1); P_lambda %.3f (< 0.2); Q_lambda %.3f (> 0.5)",
              free.tail, free.max_norm, 10.0 * free.bound, full.tail, p.tail, q.tail)};
}

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"bilinear_identity", 10, bilinear_identity},
      {"stokes_decay", 5, stokes_decay},
      {"etd4rk_order", 120, etd4rk_order},
      {"rml_moments", 30, rml_moments},
      {"analysis_oracle", 30, analysis_oracle},
      {"disc_envelope", 120, disc_envelope},
      {"varinf_envelope", 300, varinf_envelope},
      {"cts_envelope", 300, cts_envelope},
      {"disc_cts_convergence", 300, disc_cts_convergence},
      {"nse_full_obs", 1200, nse_full_obs},
      {"nse_ring_obs", 1200, nse_ring_obs},
      {"nse_continuous", 1800, nse_continuous},
  };
  return all;
}

bool run(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = s <= c.budget_s;
  const bool ok = o.pass && in_time;
  std::printf("%s  %s: %s [%.1f s of %.0f s]\n", ok ? "PASS" : "FAIL", c.name.c_str(),
              o.detail.c_str(), s, c.budget_s);
  std::fflush(stdout);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> names(argv + 1, argv + argc);
  if (names.empty()) {
    for (const auto& c : criteria()) names.push_back(c.name);
  }
  int failed = 0;
  for (const auto& n : names) {
    const Criterion* found = nullptr;
    for (const auto& c : criteria()) {
      if (c.name == n) found = &c;
    }
    if (!found) {
      std::fprintf(stderr, "unknown criterion '%s'\n", n.c_str());
      return 2;
    }
    if (!run(*found)) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
