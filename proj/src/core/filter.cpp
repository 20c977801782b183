#include "core/filter.hpp"

#include <cmath>
#include <numbers>

namespace epifilter::filter {

namespace {

void symmetrize(model::Mat4& p) { p = 0.5 * (p + p.transpose()).eval(); }

bool finite(const GaussianBelief& b) {
  return b.mean.allFinite() && b.cov.allFinite();
}

}  // namespace

GaussianBelief ekf_forecast(const GaussianBelief& belief, const model::StaticParams& p) {
  const auto jac = model::jacobians_model(belief.state(), p);

  GaussianBelief out;
  out.mean = model::step_model(belief.state(), p, 0.0).vec();
  out.cov = jac.a * belief.cov * jac.a.transpose() + jac.b * jac.b.transpose();
  symmetrize(out.cov);
  out.time_index = belief.time_index + 1;

  if (!finite(out))
    fail(ErrorKind::Numerical,
         "filter forecast diverged at grid index " + std::to_string(out.time_index));
  return out;
}

UpdateResult ekf_update(const GaussianBelief& belief, double observation,
                        const model::StaticParams& p, model::MeasurementLinearization lin) {
  const auto state = belief.state();
  const auto jac = model::jacobians_measurement(state, p.rho, lin);
  const double meas_var = p.q_eps * p.q_eps;

  const double innovation_var =
      (jac.c * belief.cov * jac.c.transpose())(0) + jac.d * meas_var * jac.d;
  if (!(innovation_var > 0.0) || !std::isfinite(innovation_var))
    fail(ErrorKind::DegenerateUpdate,
         "non-positive innovation variance at grid index " + std::to_string(belief.time_index));

  const double predicted = model::measure(state, p.rho, 0.0);
  const double residual = observation - predicted;
  const model::Vec4 gain = belief.cov * jac.c.transpose() / innovation_var;

  UpdateResult out;
  out.belief.mean = belief.mean + gain * residual;
  out.belief.cov = (model::Mat4::Identity() - gain * jac.c) * belief.cov;
  symmetrize(out.belief.cov);
  out.belief.time_index = belief.time_index;
  out.residual = residual;
  out.innovation_variance = innovation_var;
  out.loglik_increment =
      -0.5 * (std::log(2.0 * std::numbers::pi * innovation_var) + residual * residual / innovation_var);

  if (!finite(out.belief) || !std::isfinite(out.loglik_increment))
    fail(ErrorKind::Numerical,
         "filter update diverged at grid index " + std::to_string(belief.time_index));
  return out;
}

GaussianBelief initial_belief(const model::StaticParams& p, const InitialBeliefConfig& cfg) {
  if (p.i0_mean > 1.0 || p.i0_mean < 0.0)
    fail(ErrorKind::InvalidArgument, "initial_belief: i0_mean must lie in [0, 1]");

  const double sigma_i = cfg.sigma_i.value_or(0.5 * p.i0_mean);
  const double sigma_s = cfg.sigma_s.value_or(sigma_i);
  const double sigma_beta = cfg.sigma_beta.value_or(0.25 * p.beta0_mean);
  if (sigma_i < 0.0 || sigma_s < 0.0 || sigma_beta < 0.0)
    fail(ErrorKind::InvalidArgument, "initial_belief: standard deviations must be non-negative");

  GaussianBelief belief;
  belief.mean << 1.0 - p.i0_mean, p.i0_mean, 0.0, p.beta0_mean;
  belief.cov.setZero();
  belief.cov(0, 0) = sigma_s * sigma_s;
  belief.cov(1, 1) = sigma_i * sigma_i;
  belief.cov(3, 3) = sigma_beta * sigma_beta;
  belief.time_index = 0;
  return belief;
}

FilterRun run_filter(const model::StaticParams& p, const ObservationSeries& obs,
                     const GaussianBelief& init, const FilterOptions& options,
                     long total_steps) {
  p.validate();
  obs.validate();

  std::vector<std::pair<long, double>> indexed;
  indexed.reserve(obs.size());
  for (const auto& o : obs.items) indexed.emplace_back(grid_index_for_day(o.day, p.dt), o.value);

  long steps = total_steps;
  if (steps < 0) steps = indexed.empty() ? 0 : indexed.back().first;
  if (!indexed.empty() && indexed.back().first > steps)
    fail(ErrorKind::Alignment, "observations extend beyond the requested grid");

  FilterRun run;
  run.innovations.reserve(indexed.size());
  if (options.record_beliefs) run.beliefs.reserve(static_cast<std::size_t>(steps) + 1);

  GaussianBelief belief = init;
  belief.time_index = 0;

  std::size_t next_obs = 0;
  auto absorb = [&](long k) {
    while (next_obs < indexed.size() && indexed[next_obs].first == k) {
      auto updated = ekf_update(belief, indexed[next_obs].second, p, options.linearization);
      run.innovations.push_back({k, updated.residual, updated.innovation_variance,
                                 updated.loglik_increment});
      run.loglik += updated.loglik_increment;
      belief = updated.belief;
      ++next_obs;
    }
  };

  absorb(0);
  if (options.record_beliefs) run.beliefs.push_back(belief);

  for (long k = 1; k <= steps; ++k) {
    belief = ekf_forecast(belief, p);
    absorb(k);
    if (options.record_beliefs) run.beliefs.push_back(belief);
  }

  run.final_belief = belief;
  return run;
}

}  // namespace epifilter::filter
