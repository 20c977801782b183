#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "core/errors.hpp"
#include "core/filter.hpp"
#include "core/forecast.hpp"
#include "core/inference.hpp"
#include "core/synthgen.hpp"

using namespace epifilter;

namespace {

model::StaticParams default_params() {
  model::StaticParams p;
  p.rho = 0.25;
  p.q_xi = 0.005;
  p.beta0_mean = 0.12;
  p.i0_mean = 1e-3;
  p.gamma = 1.0 / 14.0;
  p.q_eps = 0.05;
  p.dt = 0.1;
  return p;
}

filter::GaussianBelief year_end_belief(const model::StaticParams& p, std::uint64_t seed) {
  synthgen::ScenarioConfig cfg;
  cfg.kind = synthgen::ScenarioKind::RandomWalk;
  cfg.duration = 365;
  cfg.seed = seed;
  const auto truth = synthgen::generate(cfg);
  filter::FilterOptions opts;
  opts.record_beliefs = false;
  return filter::run_filter(p, truth.observations, filter::initial_belief(p), opts).final_belief;
}

}  // namespace

TEST_CASE("forecast: validation") {
  const auto p = default_params();
  filter::GaussianBelief b = filter::initial_belief(p);

  CHECK_THROWS_AS(forecast::run_forecast(b, p, 0), Error);
  CHECK_THROWS_AS(forecast::run_forecast(b, p, -3), Error);

  auto bad = p;
  bad.dt = 0.3;  // 1 day is not an integer number of steps
  try {
    forecast::run_forecast(b, bad, 5);
    FAIL("expected an alignment error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Alignment);
  }
}

TEST_CASE("forecast: shape and day labels") {
  const auto p = default_params();
  const auto fc = forecast::run_forecast(filter::initial_belief(p), p, 21);
  REQUIRE(fc.points.size() == 21);
  for (int k = 0; k < 21; ++k) {
    CHECK(fc.points[k].day == static_cast<double>(k + 1));
    CHECK(fc.points[k].belief.time_index == fc.start.time_index + (k + 1) * 10);
  }
}

TEST_CASE("forecast: mean path is the zero-noise model trajectory") {
  const auto p = default_params();
  const auto start = year_end_belief(p, 11);
  const auto fc = forecast::run_forecast(start, p, 21);

  auto x = start.state();
  for (const auto& pt : fc.points) {
    for (int sub = 0; sub < 10; ++sub) x = model::step_model(x, p, 0.0);
    CHECK(pt.belief.mean(0) == x.s);
    CHECK(pt.belief.mean(1) == x.i);
    CHECK(pt.belief.mean(2) == x.r);
    // beta has no drift: the mean carries the last filtered value unchanged
    CHECK(pt.belief.mean(3) == start.mean(3));
  }
}

TEST_CASE("forecast: beta variance grows by exactly q_xi^2 dt per step") {
  const auto p = default_params();
  const auto start = year_end_belief(p, 11);
  const auto fc = forecast::run_forecast(start, p, 21);

  const double per_step = p.q_xi * p.q_xi * p.dt;
  for (int k = 0; k < 21; ++k) {
    const double expected = start.cov(3, 3) + (k + 1) * 10 * per_step;
    CHECK(std::abs(fc.points[k].belief.cov(3, 3) - expected) <= 1e-12);
    if (k > 0)
      CHECK(fc.points[k].belief.cov(3, 3) > fc.points[k - 1].belief.cov(3, 3));
  }
}

TEST_CASE("forecast: zero process noise and zero covariance stay degenerate") {
  auto p = default_params();
  p.q_xi = 0.0;
  filter::GaussianBelief b;
  b.mean << 0.9, 0.01, 0.09, 0.12;
  b.cov = model::Mat4::Zero();
  const auto fc = forecast::run_forecast(b, p, 10);
  for (const auto& pt : fc.points) {
    CHECK(pt.belief.cov.norm() == 0.0);
    CHECK(pt.re.variance == 0.0);
  }
}

TEST_CASE("forecast: marks carry delta-method Re moments") {
  const auto p = default_params();
  const auto fc = forecast::run_forecast(year_end_belief(p, 11), p, 5);
  for (const auto& pt : fc.points) {
    const auto re = model::re_moments(pt.belief.mean, pt.belief.cov, p.gamma);
    CHECK(pt.re.mean == re.mean);
    CHECK(pt.re.variance == re.variance);
  }
}

TEST_CASE("forecast: ensemble of identical samples collapses to a single run") {
  const auto p = default_params();
  synthgen::ScenarioConfig cfg;
  cfg.kind = synthgen::ScenarioKind::Constant;
  cfg.duration = 40;
  cfg.seed = 5;
  const auto truth = synthgen::generate(cfg);

  Eigen::Vector4d phi;
  phi << 0.25, 0.005, 0.12, 1e-3;
  Eigen::MatrixXd rows(5, 4);
  for (int m = 0; m < 5; ++m) rows.row(m) = phi.transpose();

  const auto params = inference::params_from_phi(phi, p);
  filter::FilterOptions opts;
  opts.record_beliefs = false;
  const auto run = filter::run_filter(params, truth.observations,
                                      filter::initial_belief(params), opts);
  const auto single = forecast::run_forecast(run.final_belief, params, 7);
  const auto mixed = forecast::run_forecast_posterior(rows, p, truth.observations, {}, 7);

  REQUIRE(mixed.points.size() == single.points.size());
  for (std::size_t k = 0; k < single.points.size(); ++k) {
    const auto& a = single.points[k];
    const auto& b = mixed.points[k];
    CHECK((a.belief.mean - b.belief.mean).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((a.belief.cov - b.belief.cov).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(a.re.mean - b.re.mean) <= 1e-12);
    CHECK(std::abs(a.re.variance - b.re.variance) <= 1e-12);
  }
}

TEST_CASE("forecast: posterior-ensemble validation") {
  const auto p = default_params();
  synthgen::ScenarioConfig cfg;
  cfg.kind = synthgen::ScenarioKind::Constant;
  cfg.duration = 10;
  const auto truth = synthgen::generate(cfg);

  Eigen::MatrixXd none(0, 4);
  CHECK_THROWS_AS(forecast::run_forecast_posterior(none, p, truth.observations, {}, 5), Error);
  Eigen::MatrixXd bad(3, 3);
  bad.setConstant(0.1);
  CHECK_THROWS_AS(forecast::run_forecast_posterior(bad, p, truth.observations, {}, 5), Error);
  Eigen::MatrixXd ok(2, 4);
  ok << 0.25, 0.005, 0.12, 1e-3, 0.3, 0.004, 0.11, 2e-3;
  CHECK_THROWS_AS(forecast::run_forecast_posterior(ok, p, {}, {}, 5), Error);
}
