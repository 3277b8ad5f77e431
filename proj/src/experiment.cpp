#include "enkf/experiment.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "enkf/errors.hpp"
#include "enkf/snapshot.hpp"

namespace enkf {

namespace {

constexpr const char* kVersion = ENKF_VERSION;

std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + num(v[i]);
  return out;
}

bool is_nse_command(Command c) {
  return c == Command::truth_gen || c == Command::run_discrete || c == Command::run_continuous;
}

std::vector<Wavevector> parse_modes(const Config& cfg, const std::string& key,
                                    const std::vector<Wavevector>& fallback) {
  if (!cfg.has(key)) return fallback;
  const auto& e = cfg.entries().at(key);
  std::vector<Wavevector> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back({std::stoi(item), 0});
      } else {
        out.push_back({std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
      }
    } catch (const std::exception&) {
      throw ConfigError(e.origin + ": key '" + key + "': expected m1:m2 pairs, got '" + e.value + "'");
    }
  }
  return out;
}

void require(bool ok, const Config& cfg, const std::string& key, const std::string& what) {
  if (ok) return;
  const auto it = cfg.entries().find(key);
  if (it == cfg.entries().end()) throw ConfigError("key '" + key + "': " + what);
  throw ConfigError(it->second.origin + ": key '" + key + "': " + what + ", got '" +
                    it->second.value + "'");
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::truth_gen: return "truth-gen";
    case Command::run_discrete: return "run-discrete";
    case Command::run_continuous: return "run-continuous";
    case Command::check_disc: return "check-disc";
    case Command::check_varinf: return "check-varinf";
    case Command::check_cts: return "check-cts";
    case Command::converge_limit: return "converge-limit";
  }
  return "unknown";
}

Command parse_command(std::string_view name) {
  for (Command c : {Command::truth_gen, Command::run_discrete, Command::run_continuous,
                    Command::check_disc, Command::check_varinf, Command::check_cts,
                    Command::converge_limit}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "model", "filter", "seed", "output_dir", "truth_file",
      "nu", "length", "kf1", "kf2", "f_amp", "grid", "nonlinear", "dt",
      "l63_sigma", "l63_rho", "l63_beta", "l96_dim", "l96_forcing", "linear_dim", "linear_rate",
      "observation", "ring_radius", "ring_inclusive",
      "ensemble_size", "obs_interval_steps", "h", "gamma", "alpha_sq", "n_obs", "T",
      "record_stride", "inflate_noise", "spin_up", "init_beta", "init_mean_sigma",
      "init_member_sigma", "tracked_modes", "tracked_members",
      "n_mc", "steps", "tracked_member", "beta_hat", "growth_samples", "growth_stride",
      "growth_eps", "growth_directions", "theta_target", "tail_steps", "dt_list",
      "record_interval", "fit_start", "rho_tolerance",
      "h_list", "gamma0", "refine",
  };
  return keys;
}

EnsembleInit ExperimentConfig::ensemble_init(const Dynamics& m) const {
  if (m.kind() == ModelKind::nse2d) return EnsembleInit::defaults(m, init_beta);
  return EnsembleInit::white(init_mean_sigma, init_member_sigma);
}

ExperimentConfig resolve_experiment(Command command, const Config& c) {
  c.require_known(known_config_keys());
  ExperimentConfig e;
  e.command = command;
  e.source = c;

  // Model.
  const std::string default_model = is_nse_command(command) ? "nse2d" : "lorenz63";
  ModelKind kind{};
  try {
    kind = parse_model_kind(c.get_string("model", default_model));
  } catch (const std::invalid_argument&) {
    require(false, c, "model", "expected lorenz63, lorenz96, nse2d or linear");
  }
  e.model = ModelSpec::defaults(kind);
  auto& nse = e.model.nse;
  nse.length = c.get_double("length", nse.length);
  nse.nu = c.get_double("nu", nse.nu);
  nse.kf1 = c.get_int("kf1", nse.kf1);
  nse.kf2 = c.get_int("kf2", nse.kf2);
  nse.f_amp = c.get_double("f_amp", nse.f_amp);
  nse.grid = c.get_int("grid", nse.grid);
  nse.nonlinear = c.get_bool("nonlinear", nse.nonlinear);
  e.model.dt_internal = c.get_double("dt", e.model.dt_internal);
  e.model.lorenz63.sigma = c.get_double("l63_sigma", e.model.lorenz63.sigma);
  e.model.lorenz63.rho = c.get_double("l63_rho", e.model.lorenz63.rho);
  e.model.lorenz63.beta = c.get_double("l63_beta", e.model.lorenz63.beta);
  e.model.lorenz96.dim = c.get_int("l96_dim", e.model.lorenz96.dim);
  e.model.lorenz96.forcing = c.get_double("l96_forcing", e.model.lorenz96.forcing);
  e.model.linear.dim = c.get_int("linear_dim", e.model.linear.dim);
  e.model.linear.rate = c.get_double("linear_rate", e.model.linear.rate);
  require(e.model.dt_internal > 0.0, c, "dt", "must be positive");
  require(nse.nu > 0.0, c, "nu", "must be positive");
  require(nse.length > 0.0, c, "length", "must be positive");
  require(nse.grid >= 16 && (nse.grid & (nse.grid - 1)) == 0, c, "grid",
          "must be a power of two >= 16");
  require(e.model.lorenz96.dim >= 4, c, "l96_dim", "must be >= 4");
  require(e.model.linear.dim >= 1, c, "linear_dim", "must be >= 1");

  // Observation.
  try {
    e.observation.kind = parse_observation_kind(c.get_string("observation", "identity"));
  } catch (const std::invalid_argument&) {
    require(false, c, "observation", "expected identity, p_inside, q_outside or zero");
  }
  e.observation.ring_radius = c.get_int("ring_radius", 5);
  e.observation.inclusive = c.get_bool("ring_inclusive", false);
  require(e.observation.ring_radius >= 0, c, "ring_radius", "must be >= 0");
  const bool ring = e.observation.kind == ObservationOperator::Kind::p_inside ||
                    e.observation.kind == ObservationOperator::Kind::q_outside;
  require(!ring || kind == ModelKind::nse2d, c, "observation",
          "ring operators need model = nse2d");

  const bool continuous = command == Command::run_continuous || command == Command::check_cts;
  e.filter_kind = c.get_string("filter", continuous ? "continuous" : "discrete");
  require(e.filter_kind == (continuous ? "continuous" : "discrete"), c, "filter",
          std::string("command ") + std::string(to_string(command)) + " runs the " +
              (continuous ? "continuous" : "discrete") + " filter");

  // Filter scalars with command-dependent defaults.
  const bool nse_model = kind == ModelKind::nse2d;
  int default_k = 20;
  double default_alpha = 0.0;
  double default_gamma = 0.01;
  switch (command) {
    case Command::run_discrete: default_alpha = 0.0025; break;
    case Command::run_continuous: default_alpha = 0.00025; default_k = 100; break;
    case Command::check_cts: default_gamma = 0.1; default_k = 10; break;
    case Command::check_disc:
    case Command::check_varinf:
    case Command::converge_limit: default_k = 10; break;
    case Command::truth_gen: break;
  }
  e.seed = c.get_u64("seed", 1);
  e.ensemble_size = c.get_int("ensemble_size", default_k);
  e.gamma = c.get_double("gamma", default_gamma);
  e.alpha_sq = c.get_double("alpha_sq", default_alpha);
  require(e.ensemble_size >= 2, c, "ensemble_size", "must be >= 2");
  require(e.gamma > 0.0, c, "gamma", "must be positive");
  require(e.alpha_sq >= 0.0, c, "alpha_sq", "must be >= 0");

  if (nse_model) {
    if (c.has("h") && !c.has("obs_interval_steps")) {
      const double j = c.get_double("h", 0.0) / e.model.dt_internal;
      require(std::abs(j - std::round(j)) < 1e-9 * std::max(1.0, j) && j >= 1.0, c, "h",
              "must be an integer multiple of dt");
      e.obs_interval_steps = static_cast<int>(std::lround(j));
    } else {
      e.obs_interval_steps = c.get_int("obs_interval_steps", 20);
    }
    require(e.obs_interval_steps >= 1, c, "obs_interval_steps", "must be >= 1");
    e.h = e.obs_interval_steps * e.model.dt_internal;
  } else {
    e.h = c.get_double("h", 0.1);
    require(e.h > 0.0, c, "h", "must be positive");
    e.obs_interval_steps = static_cast<int>(std::ceil(e.h / e.model.dt_internal - 1e-9));
  }
  e.n_obs = c.get_int("n_obs", 400);
  require(e.n_obs >= 1, c, "n_obs", "must be >= 1");
  e.T = c.get_double("T", command == Command::run_continuous ? 40.0 : 1.0);
  require(e.T > 0.0, c, "T", "must be positive");
  e.record_stride = c.get_int("record_stride", 20);
  require(e.record_stride >= 1, c, "record_stride", "must be >= 1");
  e.inflate_noise = c.get_bool("inflate_noise", true);
  e.spin_up = c.get_double("spin_up", nse_model ? 20.0 : 10.0);
  require(e.spin_up >= 0.0, c, "spin_up", "must be >= 0");
  if (nse_model) {
    const double j = e.spin_up / e.model.dt_internal;
    require(std::abs(j - std::round(j)) < 1e-9 * std::max(1.0, j), c, "spin_up",
            "must be a multiple of dt for nse2d");
  }
  e.init_beta = c.get_double("init_beta", 0.25);
  require(e.init_beta > 0.0, c, "init_beta", "must be positive");
  e.init_mean_sigma = c.get_double("init_mean_sigma", 1.0);
  e.init_member_sigma = c.get_double("init_member_sigma", 0.5);
  require(e.init_mean_sigma >= 0.0, c, "init_mean_sigma", "must be >= 0");
  require(e.init_member_sigma >= 0.0, c, "init_member_sigma", "must be >= 0");
  e.series = SeriesOptions::defaults(kind);
  e.series.tracked_modes = parse_modes(c, "tracked_modes", e.series.tracked_modes);
  e.series.tracked_members = c.get_int("tracked_members", e.series.tracked_members);
  require(e.series.tracked_members >= 0, c, "tracked_members", "must be >= 0");
  if (nse_model) {
    const SpectralLayout layout(nse.grid, nse.length);
    for (const auto& m : e.series.tracked_modes) {
      require(layout.retained(m.m1, m.m2) && (m.m1 != 0 || m.m2 != 0), c, "tracked_modes",
              "every mode must be a retained nonzero wavevector");
    }
  }
  e.output_dir = c.get_string("output_dir", ".");
  e.truth_file = c.get_string("truth_file", "");

  // Theorem checks.
  auto& t = e.theorem;
  t.observation = e.observation;
  t.h = e.h;
  t.gamma = e.gamma;
  t.alpha_sq = e.alpha_sq;
  t.ensemble_size = e.ensemble_size;
  t.n_mc = c.get_int("n_mc", command == Command::check_cts || command == Command::converge_limit
                                 ? 100 : 200);
  t.steps = c.get_int("steps", command == Command::check_varinf ? 200 : 10);
  t.tracked_member = c.get_int("tracked_member", 0);
  t.init = e.ensemble_init(*make_dynamics(e.model));
  t.spin_up = e.spin_up;
  t.seed = e.seed;
  t.beta_hat = c.get_double("beta_hat", std::numeric_limits<double>::quiet_NaN());
  t.growth_samples = c.get_int("growth_samples", t.growth_samples);
  t.growth_stride = c.get_double("growth_stride", t.growth_stride);
  t.growth_eps = c.get_double("growth_eps", t.growth_eps);
  t.growth_directions = c.get_int("growth_directions", t.growth_directions);
  t.theta_target = c.get_double("theta_target", t.theta_target);
  t.tail_steps = c.get_int("tail_steps", t.tail_steps);
  t.dt_list = c.get_double_list("dt_list", t.dt_list);
  t.T = e.T;
  t.record_interval = c.get_double("record_interval", t.record_interval);
  t.fit_start = c.get_double("fit_start", t.fit_start);
  t.rho_tolerance = c.get_double("rho_tolerance", t.rho_tolerance);
  require(t.growth_samples >= 1, c, "growth_samples", "must be >= 1");
  require(t.growth_stride > 0.0, c, "growth_stride", "must be positive");
  require(t.growth_eps > 0.0, c, "growth_eps", "must be positive");
  require(t.growth_directions >= 1, c, "growth_directions", "must be >= 1");
  require(t.rho_tolerance > 0.0, c, "rho_tolerance", "must be positive");
  if (command == Command::check_disc || command == Command::check_varinf ||
      command == Command::check_cts) {
    require(e.observation.kind == ObservationOperator::Kind::identity, c, "observation",
            "theorem checks require observation = identity");
    require(!nse_model, c, "model", "theorem checks run on the ODE models");
    validate_theorem_params(t);
    if (command == Command::check_varinf) {
      require(t.tail_steps <= t.steps, c, "tail_steps", "must not exceed steps");
    }
  }

  // Convergence experiment.
  auto& v = e.convergence;
  v.h_list = c.get_double_list("h_list", v.h_list);
  v.gamma0 = c.get_double("gamma0", v.gamma0);
  v.alpha_sq = command == Command::converge_limit ? e.alpha_sq : v.alpha_sq;
  v.T = e.T;
  v.n_mc = t.n_mc;
  v.ensemble_size = e.ensemble_size;
  v.refine = c.get_int("refine", v.refine);
  v.spin_up = e.spin_up;
  v.init = t.init;
  v.seed = e.seed;
  if (command == Command::converge_limit) {
    require(!nse_model, c, "model", "converge-limit runs on the ODE models");
    try {
      validate_convergence_config(v);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }
  }

  if (command == Command::run_continuous) {
    ContinuousConfig probe;
    probe.dt = e.model.dt_internal;
    probe.T = e.T;
    try {
      probe.substeps();
    } catch (const std::invalid_argument&) {
      require(false, c, "T", "must be a multiple of dt");
    }
  }
  return e;
}

namespace {

std::string header_block(const ExperimentConfig& cfg) {
  std::string out = "# enkf-lab " + std::string(kVersion) + " " +
                    std::string(to_string(cfg.command)) + "\n";
  out += cfg.source.echo("# config: ");
  return out;
}

std::string manifest(const ExperimentConfig& cfg, const std::vector<std::string>& extra) {
  std::ostringstream m;
  m << "command=" << to_string(cfg.command) << '\n'
    << "version=" << kVersion << '\n'
    << "model=" << to_string(cfg.model.kind) << '\n'
    << "filter=" << cfg.filter_kind << '\n'
    << "observation=" << to_string(cfg.observation.kind) << '\n'
    << "ring_radius=" << cfg.observation.ring_radius << '\n'
    << "ensemble_size=" << cfg.ensemble_size << '\n'
    << "h=" << num(cfg.h) << '\n'
    << "dt=" << num(cfg.model.dt_internal) << '\n'
    << "gamma=" << num(cfg.gamma) << '\n'
    << "alpha_sq=" << num(cfg.alpha_sq) << '\n'
    << "seed=" << cfg.seed << '\n';
  for (const auto& line : extra) m << line << '\n';
  for (const auto& [key, entry] : cfg.source.entries()) {
    m << "config." << key << '=' << entry.value << '\n';
  }
  return m.str();
}

TruthRun load_or_generate_truth(const ExperimentConfig& cfg, const Dynamics& model,
                                const ObservationMask& mask, bool& reused) {
  reused = false;
  if (!cfg.truth_file.empty()) {
    std::ifstream in(cfg.truth_file);
    if (!in) throw ConfigError(cfg.truth_file + ": cannot open truth file");
    ObservationOperator op;
    TruthRun t = read_truth(in, model, &op);
    if (std::abs(t.h - cfg.h) > 1e-12 * cfg.h) throw ConfigError("truth file: h differs from config");
    if (std::abs(t.gamma - cfg.gamma) > 1e-12 * cfg.gamma) {
      throw ConfigError("truth file: gamma differs from config");
    }
    if (t.mask.dim() != mask.dim() || t.mask.weights() != mask.weights()) {
      throw ConfigError("truth file: observation operator differs from config");
    }
    reused = true;
    return t;
  }
  const StateVector u0 = draw_truth_initial(model, cfg.spin_up, cfg.seed);
  return generate_truth(model, mask, u0, cfg.h, cfg.n_obs, cfg.gamma, cfg.seed);
}

std::string truth_text(const ExperimentConfig& cfg, const Dynamics& model, const TruthRun& t) {
  std::ostringstream s;
  s << header_block(cfg);
  write_truth(s, model, t, cfg.observation);
  return s.str();
}

std::string series_text(const ExperimentConfig& cfg, const ErrorSeries& series) {
  std::ostringstream s;
  s << header_block(cfg);
  write_series_csv(s, series);
  return s.str();
}

std::string tail_line(const ErrorSeries& s, bool member1) {
  const auto& v = member1 ? s.rel_err_member1 : s.rel_err_mean;
  const double tail = ErrorSeries::tail_mean(v, v.size() / 2);
  double max_norm = 0.0;
  for (double x : s.max_member_norm) max_norm = std::max(max_norm, x);
  std::ostringstream o;
  o.precision(6);
  o << (member1 ? "tail_rel_err_member1=" : "tail_rel_err_mean=") << tail
    << "\nmax_member_norm=" << max_norm;
  return o.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult r;
  const auto model = make_dynamics(cfg.model);
  switch (cfg.command) {
    case Command::truth_gen: {
      const ObservationMask mask = bind_observation(cfg.observation, *model);
      bool reused = false;
      const TruthRun t = load_or_generate_truth(cfg, *model, mask, reused);
      r.files["truth.csv"] = truth_text(cfg, *model, t);
      r.files["manifest.txt"] = manifest(cfg, {"n_obs=" + std::to_string(t.observations.size())});
      r.summary = "truth: " + std::to_string(t.observations.size()) + " observations";
      break;
    }
    case Command::run_discrete: {
      const ObservationMask mask = bind_observation(cfg.observation, *model);
      bool reused = false;
      const TruthRun t = load_or_generate_truth(cfg, *model, mask, reused);
      FilterConfig fc;
      fc.ensemble_size = cfg.ensemble_size;
      fc.gamma = cfg.gamma;
      fc.alpha_sq = cfg.alpha_sq;
      fc.mask = mask;
      fc.seed = cfg.seed;
      fc.series = cfg.series;
      FilterRun run = [&] {
        try {
          return run_discrete_filter(*model, fc, t, cfg.ensemble_init(*model));
        } catch (const std::invalid_argument& ex) {
          throw ConfigError(ex.what());
        }
      }();
      if (!reused) r.files["truth.csv"] = truth_text(cfg, *model, t);
      r.files["series.csv"] = series_text(cfg, run.series);
      const std::string tail = tail_line(run.series, false);
      r.files["manifest.txt"] =
          manifest(cfg, {"n_obs=" + std::to_string(t.observations.size()),
                         "truth_reused=" + std::string(reused ? "1" : "0"), tail});
      r.summary = tail;
      break;
    }
    case Command::run_continuous: {
      ContinuousConfig cc;
      cc.dt = cfg.model.dt_internal;
      cc.gamma = cfg.gamma;
      cc.alpha_sq = cfg.alpha_sq;
      cc.mask = bind_observation(cfg.observation, *model);
      cc.T = cfg.T;
      cc.inflate_noise = cfg.inflate_noise;
      cc.record_stride = cfg.record_stride;
      cc.seed = cfg.seed;
      cc.series = cfg.series;
      const StateVector u0 = draw_truth_initial(*model, cfg.spin_up, cfg.seed);
      const FilterRun run =
          run_continuous_filter(*model, cc, u0, cfg.ensemble_init(*model), cfg.ensemble_size);
      r.files["series.csv"] = series_text(cfg, run.series);
      const std::string tail = tail_line(run.series, true);
      r.files["manifest.txt"] = manifest(
          cfg, {"T=" + num(cfg.T), "inflate_noise=" + std::string(cfg.inflate_noise ? "1" : "0"),
                tail});
      r.summary = tail;
      break;
    }
    case Command::check_disc:
    case Command::check_varinf:
    case Command::check_cts: {
      const BoundReport rep = cfg.command == Command::check_disc ? check_theorem_disc(*model, cfg.theorem)
                              : cfg.command == Command::check_varinf
                                  ? check_theorem_varinf(*model, cfg.theorem)
                                  : check_theorem_cts(*model, cfg.theorem);
      std::ostringstream csv;
      csv << header_block(cfg);
      write_bound_csv(csv, rep);
      r.files["bound.csv"] = csv.str();
      std::ostringstream summary;
      write_bound_summary(summary, rep);
      std::vector<std::string> lines;
      std::istringstream in(summary.str());
      for (std::string line; std::getline(in, line);) {
        if (!line.empty()) lines.push_back("bound." + line);
      }
      r.files["manifest.txt"] = manifest(cfg, lines);
      r.criterion_met = rep.passed;
      r.summary = rep.theorem + (rep.passed ? ": PASS" : ": FAIL");
      break;
    }
    case Command::converge_limit: {
      const auto rows = convergence_experiment(*model, cfg.convergence);
      std::ostringstream csv;
      csv.precision(17);
      csv << header_block(cfg) << "h,msd,std_err\n";
      bool decreasing = true;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        csv << rows[i].h << ',' << rows[i].msd << ',' << rows[i].std_err << '\n';
        if (i > 0 && !(rows[i].msd < rows[i - 1].msd)) decreasing = false;
      }
      r.files["convergence.csv"] = csv.str();
      r.files["manifest.txt"] =
          manifest(cfg, {"h_list=" + join(cfg.convergence.h_list), "gamma0=" + num(cfg.convergence.gamma0),
                         "strictly_decreasing=" + std::string(decreasing ? "1" : "0")});
      r.criterion_met = decreasing;
      r.summary = std::string("convergence: ") + (decreasing ? "strictly decreasing" : "NOT decreasing");
      break;
    }
  }
  return r;
}

std::vector<std::string> write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir.string() + ": cannot create output directory");
  std::vector<fs::path> staged;
  try {
    for (const auto& [name, text] : result.files) {
      const fs::path tmp = dir / (name + ".partial");
      std::ofstream out(tmp, std::ios::binary);
      staged.push_back(tmp);
      out << text;
      out.close();
      if (!out) throw std::runtime_error(tmp.string() + ": write failed");
    }
  } catch (...) {
    for (const auto& p : staged) fs::remove(p, ec);
    throw;
  }
  std::vector<std::string> written;
  for (const auto& [name, text] : result.files) {
    fs::rename(dir / (name + ".partial"), dir / name);
    written.push_back((dir / name).string());
  }
  return written;
}

}  // namespace enkf
