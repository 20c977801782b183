#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "core/filter.hpp"
#include "core/inference.hpp"
#include "core/io.hpp"
#include "core/model.hpp"
#include "core/synthgen.hpp"

namespace epifilter::config {

/// Everything a workflow command needs, resolved from one JSON file plus
/// command-line overrides.
struct RunConfig {
  std::optional<std::string> dataset;  // CSV path; mutually exclusive with scenario
  std::optional<synthgen::ScenarioConfig> scenario;

  double population = 14'734'000.0;
  double dt = 0.1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  io::CivilDate start_date{2020, 4, 1};  // calendar date of day 0 in written datasets

  model::StaticParams fixed;  // gamma / q_eps / dt; phi fields hold defaults
  inference::PriorSpec priors = inference::PriorSpec::sir_default();
  inference::TmcmcConfig tmcmc;
  filter::InitialBeliefConfig initial_belief;
  model::MeasurementLinearization linearization = model::MeasurementLinearization::Scaled;

  std::optional<Eigen::Vector4d> params;  // explicit phi for smooth/forecast
  bool use_map = false;                   // take phi from <output_dir>/summary.json
  bool prior_only = false;                // calibrate against a flat likelihood

  int forecast_horizon = 21;
  bool forecast_posterior_ensemble = false;
  int forecast_max_ensemble = 200;

  void validate() const;
};

/// Parses and validates a JSON run configuration. Unknown keys are errors;
/// messages carry the offending key name.
RunConfig load_run_config(const std::string& path);

}  // namespace epifilter::config
