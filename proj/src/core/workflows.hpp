#pragma once

#include <Eigen/Dense>
#include <string>

#include "core/config.hpp"
#include "core/forecast.hpp"
#include "core/inference.hpp"
#include "core/observations.hpp"

namespace epifilter::workflows {

/// Canonical artifact paths inside a run's output directory.
struct Artifacts {
  std::string data, truth, meta, posterior, summary, states, forecast;
  static Artifacts in(const std::string& dir);
};

/// Observations from the configured dataset file, or regenerated
/// deterministically from the configured scenario.
ObservationSeries load_observations(const config::RunConfig& cfg);

/// Static-parameter vector for smooth/forecast: explicit `params`, or the
/// MAP recorded in <output_dir>/summary.json when use_map is set.
Eigen::Vector4d resolve_phi(const config::RunConfig& cfg);

void cmd_generate(const config::RunConfig& cfg);
inference::PosteriorEnsemble cmd_calibrate(const config::RunConfig& cfg);
filter::FilterRun cmd_smooth(const config::RunConfig& cfg);
forecast::ForecastResult cmd_forecast(const config::RunConfig& cfg);

}  // namespace epifilter::workflows
