#include <doctest.h>

#include <cmath>

#include "enkf/analysis.hpp"
#include "enkf/discrete_filter.hpp"
#include "enkf/rml.hpp"
#include "support.hpp"

using namespace enkf;

namespace {

Eigen::MatrixXd dense_system(const Ensemble& e, const Eigen::VectorXd& h, double gamma, double alpha_sq) {
  const Eigen::Index n = e.dim();
  const Eigen::MatrixXd c = testing::dense_covariance(e) + alpha_sq * Eigen::MatrixXd::Identity(n, n);
  return Eigen::MatrixXd::Identity(n, n) + c * h.asDiagonal() / (gamma * gamma);
}

Eigen::VectorXd dense_update(const Ensemble& e, const Eigen::VectorXd& h, double gamma, double alpha_sq,
                             const Eigen::VectorXd& vhat, const Eigen::VectorXd& y) {
  const Eigen::Index n = e.dim();
  const Eigen::MatrixXd c = testing::dense_covariance(e) + alpha_sq * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd rhs = vhat + c * h.asDiagonal() * y / (gamma * gamma);
  return dense_system(e, h, gamma, alpha_sq).fullPivLu().solve(rhs);
}

Eigen::VectorXd random_mask(Eigen::Index n, RngStream& rng) {
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i) = rng.uniform() < 0.5 ? 0.0 : 1.0;
  return h;
}

double objective(const Eigen::VectorXd& v, const Eigen::VectorXd& y, const Eigen::VectorXd& vhat,
                 const Eigen::MatrixXd& prior_inv, double gamma) {
  return 0.5 * (y - v).squaredNorm() / (gamma * gamma) + 0.5 * (vhat - v).dot(prior_inv * (vhat - v));
}

}  // namespace

TEST_CASE("predict") {
  RngStream rng(1, Purpose::Test);
  SUBCASE("identity semigroup") {
    const auto id = testing::linear_model(4, 0.0);
    const Ensemble e = testing::random_ensemble(ModelKind::linear, 4, 3, rng);
    const Ensemble p = predict(e, *id, 0.7);
    for (std::size_t k = 0; k < 3; ++k) CHECK(p.member(k).data == e.member(k).data);
  }
  SUBCASE("synchronized ensemble") {
    const auto l63 = testing::model(ModelKind::lorenz63);
    const StateVector w{ModelKind::lorenz63, Eigen::Vector3d(1, 2, 3)};
    const Ensemble p = predict(Ensemble({w, w, w}), *l63, 0.1);
    CHECK(p.deviations().norm() < 1e-14 * w.norm());
    CHECK(p.member(0).data == p.member(2).data);
  }
  SUBCASE("member-wise oracle") {
    const auto l63 = testing::model(ModelKind::lorenz63);
    const Ensemble e = testing::random_ensemble(ModelKind::lorenz63, 3, 3, rng, 5.0);
    const Ensemble p = predict(e, *l63, 0.1);
    for (std::size_t k = 0; k < 3; ++k) CHECK(p.member(k).data == l63->step(e.member(k), 0.1).data);
    CHECK(testing::rel_diff(p.mean().data, ensemble_mean(Ensemble(p.members())).data) == 0.0);
  }
  SUBCASE("model mismatch") {
    const auto l96 = testing::model(ModelKind::lorenz96);
    const Ensemble e = testing::random_ensemble(ModelKind::lorenz63, 3, 3, rng);
    CHECK_THROWS_AS(predict(e, *l96, 0.1), std::invalid_argument);
  }
}

TEST_CASE("analyze hand cases") {
  SUBCASE("zero gain") {
    const StateVector w{ModelKind::linear, Eigen::Vector2d(1, -1)};
    const Ensemble e({w, w});
    AnalysisConfig cfg;
    cfg.gamma = 0.1;
    cfg.mask = ObservationMask(ModelKind::linear, Eigen::Vector2d::Ones());
    const Ensemble a = analyze(e, {ModelKind::linear, Eigen::Vector2d(5, 5)}, cfg, 1, 2);
    CHECK(a.member(0).data == w.data);
    CHECK(a.member(1).data == w.data);
  }
  SUBCASE("scalar with C = gamma^2") {
    const double gamma = 0.3;
    const Ensemble e({{ModelKind::linear, Eigen::VectorXd::Constant(1, 2.0 + gamma)},
                      {ModelKind::linear, Eigen::VectorXd::Constant(1, 2.0 - gamma)}});
    AnalysisConfig cfg;
    cfg.gamma = gamma;
    cfg.mask = ObservationMask(ModelKind::linear, Eigen::VectorXd::Ones(1));
    const std::vector<StateVector> ys = {{ModelKind::linear, Eigen::VectorXd::Constant(1, 1.0)},
                                         {ModelKind::linear, Eigen::VectorXd::Constant(1, -4.0)}};
    const Ensemble a = analyze_with_observations(e, ys, cfg);
    CHECK(a.member(0).data(0) == doctest::Approx((2.0 + gamma + 1.0) / 2).epsilon(1e-14));
    CHECK(a.member(1).data(0) == doctest::Approx((2.0 - gamma - 4.0) / 2).epsilon(1e-14));
  }
  SUBCASE("errors") {
    const Ensemble e({{ModelKind::linear, Eigen::Vector2d(1, 0)}, {ModelKind::linear, Eigen::Vector2d(0, 1)}});
    AnalysisConfig cfg;
    cfg.mask = ObservationMask(ModelKind::linear, Eigen::Vector3d::Ones());
    CHECK_THROWS_AS(analyze(e, {ModelKind::linear, Eigen::Vector2d(0, 0)}, cfg, 0, 0), std::invalid_argument);
    cfg.mask = ObservationMask(ModelKind::linear, Eigen::Vector2d::Ones());
    cfg.gamma = 0.0;
    CHECK_THROWS_AS(analyze(e, {ModelKind::linear, Eigen::Vector2d(0, 0)}, cfg, 0, 0), std::invalid_argument);
    cfg.gamma = 1.0;
    cfg.alpha_sq = -1.0;
    CHECK_THROWS_AS(analyze(e, {ModelKind::linear, Eigen::Vector2d(0, 0)}, cfg, 0, 0), std::invalid_argument);
    cfg.alpha_sq = 0.0;
    CHECK_THROWS_AS(analyze_with_observations(e, {{ModelKind::linear, Eigen::Vector2d(0, 0)}}, cfg),
                    std::invalid_argument);
  }
}

TEST_CASE("analysis matches a dense solve") {
  RngStream rng(2, Purpose::Test);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 1 + trial % 8;
    const int K = 1 + trial % 6;
    const double alpha_sq = trial % 2 ? 0.01 : 0.0;
    const double gamma = 0.05 + rng.uniform();
    const Ensemble e = testing::random_ensemble(ModelKind::linear, dim, K, rng);
    const Eigen::VectorXd h = trial % 3 ? random_mask(dim, rng) : Eigen::VectorXd::Ones(dim);
    const AnalysisOperator op(e.deviations(), ObservationMask(ModelKind::linear, h), gamma, alpha_sq);
    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXd y = rng.normal_vector(dim);
      const Eigen::VectorXd expected = dense_update(e, h, gamma, alpha_sq, e.member(k).data, y);
      CHECK(testing::rel_diff(op.update(e.member(k).data, y), expected) < 1e-10);
    }
  }
}

TEST_CASE("analysis output minimizes the variational objective") {
  RngStream rng(3, Purpose::Test);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 6;
    const double gamma = 0.5;
    const double alpha_sq = 0.2;
    const Ensemble e = testing::random_ensemble(ModelKind::linear, dim, 4, rng);
    const Eigen::MatrixXd prior =
        testing::dense_covariance(e) + alpha_sq * Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::MatrixXd prior_inv = prior.inverse();
    const AnalysisOperator op(e.deviations(), ObservationMask(ModelKind::linear, Eigen::VectorXd::Ones(dim)),
                              gamma, alpha_sq);
    const Eigen::VectorXd vhat = e.member(0).data;
    const Eigen::VectorXd y = rng.normal_vector(dim);
    const Eigen::VectorXd v = op.update(vhat, y);
    const double eps = 1e-6;
    Eigen::VectorXd grad(dim);
    for (int i = 0; i < dim; ++i) {
      Eigen::VectorXd p = v, m = v;
      p(i) += eps;
      m(i) -= eps;
      grad(i) = (objective(p, y, vhat, prior_inv, gamma) - objective(m, y, vhat, prior_inv, gamma)) / (2 * eps);
    }
    const Eigen::VectorXd grad_at_vhat = (vhat - y) / (gamma * gamma);
    CHECK(grad.norm() < 1e-6 * grad_at_vhat.norm());
  }
}

TEST_CASE("gain contraction estimates with H = I") {
  RngStream rng(4, Purpose::Test);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + trial % 6;
    const double gamma = 0.1 + rng.uniform();
    const double alpha_sq = trial % 2 ? rng.uniform() : 0.0;
    const Ensemble e = testing::random_ensemble(ModelKind::linear, dim, 1 + trial % 5, rng);
    const AnalysisOperator op(e.deviations(), ObservationMask(ModelKind::linear, Eigen::VectorXd::Ones(dim)),
                              gamma, alpha_sq);
    Eigen::MatrixXd inv(dim, dim);
    Eigen::MatrixXd inv_gain(dim, dim);
    for (int i = 0; i < dim; ++i) {
      const Eigen::VectorXd ei = Eigen::VectorXd::Unit(dim, i);
      inv.col(i) = op.solve(ei);
      inv_gain.col(i) = op.solve(op.gain_apply(ei));
    }
    const double n1 = Eigen::JacobiSVD<Eigen::MatrixXd>(inv).singularValues()(0);
    const double n2 = Eigen::JacobiSVD<Eigen::MatrixXd>(inv_gain).singularValues()(0);
    CHECK(n1 <= gamma * gamma / (gamma * gamma + alpha_sq) + 1e-12);
    CHECK(n2 <= 1.0 + 1e-12);
  }
}

TEST_CASE("analysis is translation covariant and member-local") {
  RngStream rng(5, Purpose::Test);
  const int dim = 5;
  const Ensemble e = testing::random_ensemble(ModelKind::linear, dim, 4, rng);
  AnalysisConfig cfg;
  cfg.gamma = 0.3;
  cfg.alpha_sq = 0.05;
  cfg.mask = ObservationMask(ModelKind::linear, Eigen::VectorXd::Ones(dim));
  std::vector<StateVector> ys;
  for (int k = 0; k < 4; ++k) ys.push_back(testing::random_state(ModelKind::linear, dim, rng));
  const StateVector shift = testing::random_state(ModelKind::linear, dim, rng, 3.0);
  std::vector<StateVector> members2, ys2;
  for (int k = 0; k < 4; ++k) {
    members2.push_back(e.member(k) + shift);
    ys2.push_back(ys[k] + shift);
  }
  const Ensemble a = analyze_with_observations(e, ys, cfg);
  const Ensemble b = analyze_with_observations(Ensemble(members2), ys2, cfg);
  for (int k = 0; k < 4; ++k) CHECK(testing::rel_diff((a.member(k) + shift).data, b.member(k).data) < 1e-12);

  std::vector<StateVector> twins = {e.member(0), e.member(0), e.member(1)};
  const std::vector<StateVector> tys = {ys[0], ys[0], ys[1]};
  const Ensemble t = analyze_with_observations(Ensemble(twins), tys, cfg);
  CHECK(t.member(0).data == t.member(1).data);
}

TEST_CASE("large ensembles approach the Kalman update on a linear model") {
  const int dim = 2;
  const Eigen::Vector2d m0(1.0, -0.5);
  Eigen::Matrix2d p0;
  p0 << 1.0, 0.3, 0.3, 0.5;
  const Eigen::Matrix2d l = p0.llt().matrixL();
  const double gamma = 0.7;
  const Eigen::Vector2d y(0.2, 0.4);
  const Eigen::Matrix2d gain = p0 * (p0 + gamma * gamma * Eigen::Matrix2d::Identity()).inverse();
  const Eigen::Vector2d kf_mean = m0 + gain * (y - m0);
  const Eigen::Matrix2d kf_cov = (Eigen::Matrix2d::Identity() - gain) * p0;

  double prev = std::numeric_limits<double>::infinity();
  for (int K : {100, 10000}) {
    RngStream rng(6, Purpose::Test, static_cast<std::uint64_t>(K));
    std::vector<StateVector> members;
    for (int k = 0; k < K; ++k) members.push_back({ModelKind::linear, m0 + l * rng.normal_vector(dim)});
    AnalysisConfig cfg;
    cfg.gamma = gamma;
    cfg.mask = ObservationMask(ModelKind::linear, Eigen::VectorXd::Ones(dim));
    const Ensemble a = analyze(Ensemble(members), {ModelKind::linear, y}, cfg, 1, 17);
    const double err = (a.mean().data - kf_mean).norm() + (testing::dense_covariance(a) - kf_cov).norm();
    CHECK(err < 6.0 / std::sqrt(K));
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("rml_sample") {
  SUBCASE("scalar conjugate case") {
    RmlProblem p{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1), 1.0,
                 Eigen::VectorXd::Zero(1)};
    RngStream rng(7, Purpose::RmlPrior);
    const auto s = rml_sample(p, 40000, rng);
    double mean = 0.0, var = 0.0;
    for (const auto& x : s) mean += x(0) / s.size();
    for (const auto& x : s) var += (x(0) - mean) * (x(0) - mean) / s.size();
    CHECK(std::abs(mean) < 5 * std::sqrt(0.5 / s.size()));
    CHECK(std::abs(var - 0.5) < 0.02);
  }
  SUBCASE("uninformative data") {
    Eigen::Matrix2d f;
    f << 1.0, 0.0, 0.4, 0.8;
    RmlProblem p{Eigen::Vector2d(1, 2), f, Eigen::MatrixXd::Identity(2, 2), 1e6, Eigen::Vector2d(0, 0)};
    RngStream rng(8, Purpose::RmlPrior);
    const auto s = rml_sample(p, 40000, rng);
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& x : s) mean += x / s.size();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& x : s) cov += (x - mean) * (x - mean).transpose() / s.size();
    const Eigen::Matrix2d prior = f * f.transpose();
    CHECK((mean - Eigen::Vector2d(1, 2)).norm() < 0.03);
    CHECK((cov - prior).norm() / prior.norm() < 0.03);
  }
  SUBCASE("mask forward operator matches the dense one") {
    Eigen::Matrix3d f = Eigen::Matrix3d::Identity();
    f(1, 0) = 0.5;
    const Eigen::Vector3d w(1, 0, 1);
    RngStream a(9, Purpose::RmlPrior), b(9, Purpose::RmlPrior);
    const auto s1 = rml_sample(Eigen::Vector3d(0, 1, 2), f, ObservationMask(ModelKind::linear, w), 0.5,
                               Eigen::Vector3d(1, 1, 1), 10, a);
    const auto s2 = rml_sample({Eigen::Vector3d(0, 1, 2), f, Eigen::MatrixXd(w.asDiagonal()), 0.5,
                                Eigen::Vector3d(1, 1, 1)},
                               10, b);
    for (int i = 0; i < 10; ++i) CHECK(testing::rel_diff(s1[i], s2[i]) < 1e-12);
  }
  SUBCASE("singular prior") {
    Eigen::Matrix2d f;
    f << 1.0, 1.0, 1.0, 1.0;
    RmlProblem p{Eigen::Vector2d::Zero(), f, Eigen::MatrixXd::Identity(2, 2), 1.0, Eigen::Vector2d::Zero()};
    RngStream rng(1, Purpose::RmlPrior);
    CHECK_THROWS_AS(rml_sample(p, 1, rng), std::invalid_argument);
  }
}

TEST_CASE("discrete filter") {
  const auto l63 = testing::model(ModelKind::lorenz63);
  const StateVector u0 = draw_truth_initial(*l63, 10.0, 3);

  SUBCASE("nothing observed gives free ensemble evolution") {
    FilterConfig cfg;
    cfg.ensemble_size = 4;
    cfg.mask = bind_observation(ObservationOperator::zero(), *l63);
    const TruthRun t = generate_truth(*l63, cfg.mask, u0, 0.1, 10, cfg.gamma, 3);
    const Ensemble init = draw_initial_ensemble(*l63, EnsembleInit::white(1.0, 0.5), u0, 4, 3);
    const FilterRun run = run_discrete_filter(*l63, cfg, t, init);
    for (int k = 0; k < 4; ++k) {
      StateVector v = init.member(k);
      for (int j = 0; j < 10; ++j) v = l63->step(v, 0.1);
      CHECK(run.final_ensemble.member(k).data == v.data);
    }
    CHECK(run.series.size() == 11);
  }
  SUBCASE("truth-initialized ensemble stays close for a few steps") {
    FilterConfig cfg;
    cfg.ensemble_size = 10;
    cfg.gamma = 1e-4;
    cfg.mask = bind_observation(ObservationOperator::identity(), *l63);
    const TruthRun t = generate_truth(*l63, cfg.mask, u0, 0.1, 5, cfg.gamma, 3);
    const FilterRun run = run_discrete_filter(*l63, cfg, t, EnsembleInit::white(1e-4, 1e-4));
    for (double e : run.series.rel_err_mean) CHECK(e < 1e-3);
  }
  SUBCASE("deterministic replay") {
    FilterConfig cfg;
    cfg.ensemble_size = 5;
    cfg.alpha_sq = 0.001;
    cfg.mask = bind_observation(ObservationOperator::identity(), *l63);
    const TruthRun t = generate_truth(*l63, cfg.mask, u0, 0.1, 20, cfg.gamma, 3);
    const FilterRun a = run_discrete_filter(*l63, cfg, t, EnsembleInit::white(1.0, 0.5));
    const FilterRun b = run_discrete_filter(*l63, cfg, t, EnsembleInit::white(1.0, 0.5));
    CHECK(a.series.rel_err_mean == b.series.rel_err_mean);
    CHECK(a.series.spread == b.series.spread);
  }
  SUBCASE("config and truth must agree") {
    FilterConfig cfg;
    cfg.ensemble_size = 5;
    cfg.mask = bind_observation(ObservationOperator::identity(), *l63);
    const TruthRun t = generate_truth(*l63, cfg.mask, u0, 0.1, 3, cfg.gamma, 3);
    FilterConfig bad = cfg;
    bad.gamma = 0.02;
    CHECK_THROWS_AS(run_discrete_filter(*l63, bad, t, EnsembleInit::white(1, 0.5)), std::invalid_argument);
    bad = cfg;
    bad.mask = bind_observation(ObservationOperator::zero(), *l63);
    CHECK_THROWS_AS(run_discrete_filter(*l63, bad, t, EnsembleInit::white(1, 0.5)), std::invalid_argument);
    const Ensemble wrong_k = draw_initial_ensemble(*l63, EnsembleInit::white(1, 0.5), u0, 3, 1);
    CHECK_THROWS_AS(run_discrete_filter(*l63, cfg, t, wrong_k), std::invalid_argument);
  }
}

TEST_CASE("discrete filter on NSE records the documented series") {
  const auto m = testing::nse();
  const StateVector u0 = draw_truth_initial(*m, 1.0, 5);
  FilterConfig cfg;
  cfg.ensemble_size = 5;
  cfg.alpha_sq = 0.0025;
  cfg.mask = bind_observation(ObservationOperator::identity(), *m);
  cfg.series = SeriesOptions::defaults(ModelKind::nse2d);
  const TruthRun t = generate_truth(*m, cfg.mask, u0, 0.1, 3, cfg.gamma, 5);
  const FilterRun run = run_discrete_filter(*m, cfg, t, EnsembleInit::defaults(*m));
  CHECK(run.series.size() == 4);
  CHECK(run.series.time.back() == doctest::Approx(0.3));
  CHECK(run.series.modes.size() == cfg.series.tracked_modes.size());
  CHECK(run.series.rel_err_mean.back() < run.series.rel_err_mean.front());
}
