#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/model.hpp"
#include "core/observations.hpp"
#include "core/rng.hpp"

namespace epifilter::synthgen {

enum class ScenarioKind { RandomWalk, Seasonal, Lockdown, Constant };

/// Generating configuration for one synthetic outbreak. Defaults reproduce
/// the benchmark scenarios; every knob is overridable.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::RandomWalk;
  int duration = 365;                // days of truth trajectory
  std::optional<int> obs_days;      // observation window; defaults to duration
  int obs_per_day = 1;
  double dt = 0.1;                   // days per integration step
  std::uint64_t seed = 0;

  double rho_true = 0.25;
  double q_eps_true = 0.05;
  double gamma = 1.0 / 14.0;
  std::optional<double> beta0;      // β(0); per-kind default when unset
  double i0 = 1e-3;

  // random_walk
  double q_xi_true = 0.005;

  // seasonal: β(t) = b0 + amplitude·sin(2π t/period + phase), b0 set so β(0) = beta0
  double amplitude = 0.04;
  double period = 365.0;
  double phase = 0.0;

  // lockdown: β(t) = beta0 − drop_depth·[σ((t−t1)/w1) − σ((t−t2)/w2)]
  double drop_depth = 0.09;
  double onset_day = 30.0;
  double onset_width = 3.0;
  double recovery_day = 140.0;
  double recovery_width = 20.0;

  double resolved_beta0() const;
  void validate() const;
};

/// Ground truth on the integration grid plus the noisy observations taken
/// from it. `noise` records the exact ε_j draws, one per observation.
struct SyntheticTruth {
  std::vector<double> times;                  // grid times in days
  std::vector<model::AugmentedState> states;  // one per grid time
  ObservationSeries observations;
  std::vector<double> noise;
  model::StaticParams params;                 // generating parameters
  double dt = 0.1;
  int beta_clip_events = 0;

  const model::AugmentedState& state_at_day(double day) const;
};

SyntheticTruth generate(const ScenarioConfig& cfg);
SyntheticTruth generate_random_walk(const ScenarioConfig& cfg);
SyntheticTruth generate_seasonal(const ScenarioConfig& cfg);
SyntheticTruth generate_lockdown(const ScenarioConfig& cfg);
SyntheticTruth generate_constant(const ScenarioConfig& cfg);

/// Samples d_j = ρ·i(t_j)·(1+ε_j) at grid-aligned days. obs_days < 0 means
/// every full day in the trajectory; noise_out (if given) receives the ε_j.
ObservationSeries observe_truth(const SyntheticTruth& truth, double rho_true,
                                double q_eps_true, std::uint64_t seed,
                                int obs_days = -1, int obs_per_day = 1,
                                std::vector<double>* noise_out = nullptr);

/// The prescribed β(t) curve of a scenario; constant kinds (random_walk,
/// constant) return the starting value.
double scenario_beta(const ScenarioConfig& cfg, double t);

const char* scenario_name(ScenarioKind kind);
ScenarioKind scenario_from_name(const std::string& name);

}  // namespace epifilter::synthgen
