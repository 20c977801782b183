#include "core/synthgen.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "core/errors.hpp"

namespace epifilter::synthgen {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double seasonal_offset(const ScenarioConfig& cfg) {
  // b0 chosen so the curve passes through beta0 at t = 0.
  return cfg.resolved_beta0() - cfg.amplitude * std::sin(cfg.phase);
}

double seasonal_beta(const ScenarioConfig& cfg, double t) {
  return seasonal_offset(cfg) +
         cfg.amplitude * std::sin(2.0 * std::numbers::pi * t / cfg.period + cfg.phase);
}

double lockdown_beta(const ScenarioConfig& cfg, double t) {
  return cfg.resolved_beta0() -
         cfg.drop_depth * (logistic((t - cfg.onset_day) / cfg.onset_width) -
                           logistic((t - cfg.recovery_day) / cfg.recovery_width));
}

model::StaticParams generating_params(const ScenarioConfig& cfg, double q_xi) {
  model::StaticParams p;
  p.rho = cfg.rho_true;
  p.q_xi = q_xi;
  p.beta0_mean = cfg.resolved_beta0();
  p.i0_mean = cfg.i0;
  p.gamma = cfg.gamma;
  p.q_eps = cfg.q_eps_true;
  p.dt = cfg.dt;
  return p;
}

/// Integrates the compartments with β prescribed by `beta_at(t)`; the β
/// component of each stored state is overwritten with the exact curve value.
SyntheticTruth integrate_prescribed(const ScenarioConfig& cfg,
                                    const std::function<double(double)>& beta_at) {
  const long n_steps = grid_index_for_day(static_cast<double>(cfg.duration), cfg.dt);
  model::StaticParams p = generating_params(cfg, 0.0);

  SyntheticTruth truth;
  truth.dt = cfg.dt;
  truth.params = p;
  truth.times.reserve(n_steps + 1);
  truth.states.reserve(n_steps + 1);

  model::AugmentedState x{1.0 - cfg.i0, cfg.i0, 0.0, beta_at(0.0)};
  truth.times.push_back(0.0);
  truth.states.push_back(x);
  for (long k = 0; k < n_steps; ++k) {
    x = model::step_model(x, p, 0.0);
    const double t = (k + 1) * cfg.dt;
    x.beta = beta_at(t);
    truth.times.push_back(t);
    truth.states.push_back(x);
  }
  return truth;
}

void attach_observations(SyntheticTruth& truth, const ScenarioConfig& cfg) {
  truth.observations =
      observe_truth(truth, cfg.rho_true, cfg.q_eps_true, mix_seed(cfg.seed, 2),
                    cfg.obs_days.value_or(cfg.duration), cfg.obs_per_day, &truth.noise);
}

}  // namespace

double ScenarioConfig::resolved_beta0() const {
  if (beta0) return *beta0;
  switch (kind) {
    case ScenarioKind::Seasonal:
      return 0.1551;
    case ScenarioKind::Lockdown:
      return 0.1400;
    case ScenarioKind::RandomWalk:
    case ScenarioKind::Constant:
      return 0.12;
  }
  return 0.12;
}

void ScenarioConfig::validate() const {
  if (duration < 1) fail(ErrorKind::Config, "scenario: duration must be at least 1 day");
  if (!(dt > 0.0)) fail(ErrorKind::Config, "scenario: dt must be positive");
  if (obs_per_day < 1) fail(ErrorKind::Config, "scenario: obs_per_day must be at least 1");
  if (obs_days && (*obs_days < 1 || *obs_days > duration))
    fail(ErrorKind::Config, "scenario: obs_days must lie in [1, duration]");
  if (rho_true < 0.0 || q_eps_true < 0.0 || q_xi_true < 0.0 || gamma < 0.0)
    fail(ErrorKind::Config, "scenario: rates rho_true/q_eps_true/q_xi_true/gamma must be >= 0");
  if (i0 < 0.0 || i0 > 1.0) fail(ErrorKind::Config, "scenario: i0 must lie in [0, 1]");
  if (resolved_beta0() < 0.0) fail(ErrorKind::Config, "scenario: beta0 must be >= 0");
  if (kind == ScenarioKind::Seasonal) {
    if (!(period > 0.0)) fail(ErrorKind::Config, "scenario: period must be positive");
    if (seasonal_offset(*this) - std::abs(amplitude) < 0.0)
      fail(ErrorKind::Config, "scenario: amplitude drives beta negative over a period");
  }
  if (kind == ScenarioKind::Lockdown) {
    if (!(onset_width > 0.0) || !(recovery_width > 0.0))
      fail(ErrorKind::Config, "scenario: onset_width/recovery_width must be positive");
  }
}

const model::AugmentedState& SyntheticTruth::state_at_day(double day) const {
  const long idx = grid_index_for_day(day, dt);
  if (idx >= static_cast<long>(states.size()))
    fail(ErrorKind::InvalidArgument,
         "state_at_day: day " + std::to_string(day) + " lies beyond the trajectory");
  return states[static_cast<std::size_t>(idx)];
}

SyntheticTruth generate(const ScenarioConfig& cfg) {
  switch (cfg.kind) {
    case ScenarioKind::RandomWalk:
      return generate_random_walk(cfg);
    case ScenarioKind::Seasonal:
      return generate_seasonal(cfg);
    case ScenarioKind::Lockdown:
      return generate_lockdown(cfg);
    case ScenarioKind::Constant:
      return generate_constant(cfg);
  }
  fail(ErrorKind::Config, "scenario: unknown kind");
}

SyntheticTruth generate_random_walk(const ScenarioConfig& cfg) {
  if (cfg.kind != ScenarioKind::RandomWalk)
    fail(ErrorKind::InvalidArgument, "generate_random_walk: cfg.kind mismatch");
  cfg.validate();

  const long n_steps = grid_index_for_day(static_cast<double>(cfg.duration), cfg.dt);
  model::StaticParams p = generating_params(cfg, cfg.q_xi_true);

  SyntheticTruth truth;
  truth.dt = cfg.dt;
  truth.params = p;
  truth.times.reserve(n_steps + 1);
  truth.states.reserve(n_steps + 1);

  Rng rng(mix_seed(cfg.seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);

  model::AugmentedState x{1.0 - cfg.i0, cfg.i0, 0.0, cfg.resolved_beta0()};
  truth.times.push_back(0.0);
  truth.states.push_back(x);
  for (long k = 0; k < n_steps; ++k) {
    x = model::step_model(x, p, normal(rng));
    if (x.beta < 0.0) {
      x.beta = 0.0;
      ++truth.beta_clip_events;
    }
    truth.times.push_back((k + 1) * cfg.dt);
    truth.states.push_back(x);
  }

  attach_observations(truth, cfg);
  return truth;
}

SyntheticTruth generate_seasonal(const ScenarioConfig& cfg) {
  if (cfg.kind != ScenarioKind::Seasonal)
    fail(ErrorKind::InvalidArgument, "generate_seasonal: cfg.kind mismatch");
  cfg.validate();
  SyntheticTruth truth =
      integrate_prescribed(cfg, [&cfg](double t) { return seasonal_beta(cfg, t); });
  attach_observations(truth, cfg);
  return truth;
}

SyntheticTruth generate_lockdown(const ScenarioConfig& cfg) {
  if (cfg.kind != ScenarioKind::Lockdown)
    fail(ErrorKind::InvalidArgument, "generate_lockdown: cfg.kind mismatch");
  cfg.validate();
  // The sigmoid pair has no closed-form minimum; scan the grid for negativity.
  const long n_steps = grid_index_for_day(static_cast<double>(cfg.duration), cfg.dt);
  for (long k = 0; k <= n_steps; ++k) {
    if (lockdown_beta(cfg, k * cfg.dt) < 0.0)
      fail(ErrorKind::Config, "scenario: drop_depth drives beta negative near day " +
                                  std::to_string(k * cfg.dt));
  }
  SyntheticTruth truth =
      integrate_prescribed(cfg, [&cfg](double t) { return lockdown_beta(cfg, t); });
  attach_observations(truth, cfg);
  return truth;
}

SyntheticTruth generate_constant(const ScenarioConfig& cfg) {
  if (cfg.kind != ScenarioKind::Constant)
    fail(ErrorKind::InvalidArgument, "generate_constant: cfg.kind mismatch");
  cfg.validate();
  const double b = cfg.resolved_beta0();
  SyntheticTruth truth = integrate_prescribed(cfg, [b](double) { return b; });
  attach_observations(truth, cfg);
  return truth;
}

ObservationSeries observe_truth(const SyntheticTruth& truth, double rho_true,
                                double q_eps_true, std::uint64_t seed, int obs_days,
                                int obs_per_day, std::vector<double>* noise_out) {
  if (truth.states.empty())
    fail(ErrorKind::InvalidArgument, "observe_truth: empty trajectory");
  if (obs_per_day < 1)
    fail(ErrorKind::InvalidArgument, "observe_truth: obs_per_day must be at least 1");
  if (obs_days < 0) obs_days = static_cast<int>(std::floor(truth.times.back() + 1e-9));
  if (obs_days < 1) fail(ErrorKind::InvalidArgument, "observe_truth: empty observation window");

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  ObservationSeries obs;
  const long count = static_cast<long>(obs_days) * obs_per_day;
  obs.items.reserve(count);
  if (noise_out) {
    noise_out->clear();
    noise_out->reserve(count);
  }
  for (long j = 0; j < count; ++j) {
    const double day = static_cast<double>(j) / obs_per_day;
    const double eps = q_eps_true * normal(rng);
    const double i_true = truth.state_at_day(day).i;
    obs.items.push_back({day, rho_true * i_true * (1.0 + eps)});
    if (noise_out) noise_out->push_back(eps);
  }
  return obs;
}

double scenario_beta(const ScenarioConfig& cfg, double t) {
  switch (cfg.kind) {
    case ScenarioKind::Seasonal:
      return seasonal_beta(cfg, t);
    case ScenarioKind::Lockdown:
      return lockdown_beta(cfg, t);
    case ScenarioKind::RandomWalk:
    case ScenarioKind::Constant:
      return cfg.resolved_beta0();
  }
  return cfg.resolved_beta0();
}

const char* scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::RandomWalk:
      return "random_walk";
    case ScenarioKind::Seasonal:
      return "seasonal";
    case ScenarioKind::Lockdown:
      return "lockdown";
    case ScenarioKind::Constant:
      return "constant";
  }
  return "unknown";
}

ScenarioKind scenario_from_name(const std::string& name) {
  if (name == "random_walk") return ScenarioKind::RandomWalk;
  if (name == "seasonal") return ScenarioKind::Seasonal;
  if (name == "lockdown") return ScenarioKind::Lockdown;
  if (name == "constant") return ScenarioKind::Constant;
  fail(ErrorKind::Config, "scenario: unknown kind '" + name + "'");
}

}  // namespace epifilter::synthgen
