#include <doctest.h>

#include <cmath>

#include "enkf/observation.hpp"
#include "support.hpp"

using namespace enkf;

TEST_CASE("apply_observation") {
  const auto m = testing::nse();
  const SpectralLayout& l = *m->layout();
  RngStream rng(1, Purpose::Test);
  const StateVector u = testing::random_nse_state(l, rng);

  CHECK(apply_observation(bind_observation(ObservationOperator::identity(), *m), u).data == u.data);
  CHECK(apply_observation(bind_observation(ObservationOperator::zero(), *m), u).data.norm() == 0.0);

  const ObservationMask p = bind_observation(ObservationOperator::inside(5), *m);
  const ObservationMask q = bind_observation(ObservationOperator::outside(5), *m);
  const StateVector pu = apply_observation(p, u);
  const StateVector qu = apply_observation(q, u);
  CHECK((pu + qu - u).data.norm() <= 1e-14 * u.norm());
  CHECK(dot(pu, qu) == 0.0);
  CHECK(apply_observation(p, pu).data == pu.data);

  for (int trial = 0; trial < 5; ++trial) {
    const StateVector a = testing::random_nse_state(l, rng);
    const StateVector b = testing::random_nse_state(l, rng);
    for (const auto* mask : {&p, &q}) {
      CHECK(std::abs(dot(apply_observation(*mask, a), b) - dot(a, apply_observation(*mask, b))) <
            1e-14 * a.norm() * b.norm());
      CHECK((apply_observation(*mask, apply_observation(*mask, a)) - apply_observation(*mask, a))
                .data.norm() == 0.0);
    }
  }
}

TEST_CASE("ring boundary is strict unless inclusive") {
  const auto m = testing::nse();
  const SpectralLayout& l = *m->layout();
  const ObservationMask strict = bind_observation(ObservationOperator::inside(5), *m);
  const ObservationMask incl = bind_observation(ObservationOperator::inside(5, true), *m);
  for (const auto& mode : {Wavevector{5, 0}, Wavevector{3, 4}, Wavevector{-4, 3}}) {
    const int i = l.stored_index(mode.m1, mode.m2);
    REQUIRE(i >= 0);
    CHECK(strict.weights()(2 * i) == 0.0);
    CHECK(incl.weights()(2 * i) == 1.0);
  }
  const int inside = l.stored_index(4, 2);
  CHECK(strict.weights()(2 * inside) == 1.0);
  long count = 0;
  for (const auto& mode : l.modes()) count += mode.norm_sq() < 25;
  CHECK(strict.observed_count() == 2 * count);
}

TEST_CASE("ring operators need a spectral state") {
  const auto l63 = testing::model(ModelKind::lorenz63);
  CHECK_THROWS_AS(bind_observation(ObservationOperator::inside(5), *l63), std::invalid_argument);
  CHECK_THROWS_AS(bind_observation(ObservationOperator::outside(5), *l63), std::invalid_argument);
  CHECK(bind_observation(ObservationOperator::identity(), *l63).is_identity());
  const ObservationMask mask = bind_observation(ObservationOperator::identity(), *l63);
  CHECK_THROWS_AS(apply_observation(mask, {ModelKind::lorenz63, Eigen::Vector2d(0, 0)}),
                  std::invalid_argument);
  CHECK(parse_observation_kind("q_outside") == ObservationOperator::Kind::q_outside);
  CHECK_THROWS_AS(parse_observation_kind("ring"), std::invalid_argument);
}

TEST_CASE("generate_truth") {
  const auto m = testing::model(ModelKind::lorenz63);
  const ObservationMask id = bind_observation(ObservationOperator::identity(), *m);
  const StateVector u0{ModelKind::lorenz63, Eigen::Vector3d(1, 2, 20)};

  SUBCASE("noiseless observations") {
    const TruthRun t = generate_truth(*m, id, u0, 0.1, 5, 0.0, 3);
    REQUIRE(t.states.size() == 6);
    REQUIRE(t.observations.size() == 5);
    for (int j = 0; j < 5; ++j) CHECK(t.observations[j].data == t.states[j + 1].data);
    CHECK(t.states[1].data == m->step(u0, 0.1).data);
  }
  SUBCASE("zero operator gives pure noise") {
    const auto lin = testing::linear_model(100, 0.0);
    const ObservationMask zero = bind_observation(ObservationOperator::zero(), *lin);
    const TruthRun t = generate_truth(*lin, zero, StateVector{ModelKind::linear, Eigen::VectorXd::Ones(100)},
                                      0.1, 100, 0.01, 4);
    double ss = 0.0;
    for (const auto& y : t.observations) ss += y.squared_norm();
    CHECK(std::abs(std::sqrt(ss / 1e4) / 0.01 - 1.0) < 0.03);
  }
  SUBCASE("reproducible") {
    const TruthRun a = generate_truth(*m, id, u0, 0.1, 5, 0.01, 3);
    const TruthRun b = generate_truth(*m, id, u0, 0.1, 5, 0.01, 3);
    for (int j = 0; j < 5; ++j) CHECK(a.observations[j].data == b.observations[j].data);
    const TruthRun c = generate_truth(*m, id, u0, 0.1, 5, 0.01, 4);
    CHECK(a.observations[0].data != c.observations[0].data);
  }
  SUBCASE("errors") {
    const auto l96 = testing::model(ModelKind::lorenz96);
    const ObservationMask wrong = bind_observation(ObservationOperator::identity(), *l96);
    CHECK_THROWS_AS(generate_truth(*m, wrong, u0, 0.1, 5, 0.01, 3), std::invalid_argument);
    CHECK_THROWS_AS(generate_truth(*m, id, u0, 0.1, 0, 0.01, 3), std::invalid_argument);
    CHECK_THROWS_AS(generate_truth(*m, id, u0, 0.1, 5, -1.0, 3), std::invalid_argument);
  }
}

TEST_CASE("perturb_observation") {
  const StateVector y{ModelKind::linear, Eigen::Vector2d(0.5, -1.0)};
  CHECK(perturb_observation(y, 0.0, 3, 4, 5).data == y.data);

  const double gamma = 0.01;
  const int n = 100000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (int k = 0; k < n; ++k) sum += perturb_observation(y, gamma, k, 7, 5).data;
  const Eigen::Vector2d mean = sum / n;
  CHECK(std::abs(mean(0) - y.data(0)) < 5 * gamma / std::sqrt(n));
  CHECK(std::abs(mean(1) - y.data(1)) < 5 * gamma / std::sqrt(n));

  const StateVector z{ModelKind::linear, Eigen::VectorXd::Zero(1000)};
  const StateVector a = perturb_observation(z, 1.0, 0, 7, 5);
  const StateVector b = perturb_observation(z, 1.0, 1, 7, 5);
  CHECK(std::abs(testing::sample_correlation(a.data, b.data)) < 0.05);
}

TEST_CASE("observation and perturbation noise are independent streams") {
  const auto lin = testing::linear_model(1000, 0.0);
  const ObservationMask zero = bind_observation(ObservationOperator::zero(), *lin);
  const TruthRun t = generate_truth(*lin, zero, lin->zero_state(), 0.1, 1, 1.0, 9);
  const StateVector p = perturb_observation(lin->zero_state(), 1.0, 0, 1, 9);
  CHECK(std::abs(testing::sample_correlation(t.observations[0].data, p.data)) < 0.1);
}
