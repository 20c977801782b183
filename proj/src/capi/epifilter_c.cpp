#include "epifilter/epifilter.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/filter.hpp"
#include "core/forecast.hpp"
#include "core/inference.hpp"
#include "core/io.hpp"
#include "core/workflows.hpp"

using namespace epifilter;

struct epi_config {
  config::RunConfig cfg;
};
struct epi_observations {
  ObservationSeries obs;
};
struct epi_posterior {
  inference::PosteriorEnsemble ens;
  inference::PosteriorSummary summary;
};
struct epi_track {
  filter::FilterRun run;
  model::StaticParams params;
  long per_day = 10;
};
struct epi_forecast {
  forecast::ForecastResult fc;
  double dt = 0.1;
};

namespace {

thread_local std::string g_last_error;

epi_status status_of(const Error& e) {
  return e.is_numerical() ? EPI_ERR_NUMERICAL : EPI_ERR_INVALID;
}

/// Runs fn inside the C boundary: exceptions become status codes + message.
template <typename Fn>
epi_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return EPI_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EPI_ERR_INVALID;
  } catch (...) {
    g_last_error = "unknown error";
    return EPI_ERR_INVALID;
  }
}

epi_status invalid(const char* msg) {
  g_last_error = msg;
  return EPI_ERR_INVALID;
}

long steps_per_day_checked(double dt) {
  const long steps = std::lround(1.0 / dt);
  if (steps < 1 || std::abs(steps * dt - 1.0) > 1e-6)
    fail(ErrorKind::Alignment, "dt does not subdivide a day evenly");
  return steps;
}

}  // namespace

extern "C" {

const char* epi_last_error(void) { return g_last_error.c_str(); }

const char* epi_version(void) { return "0.1.0"; }

epi_status epi_config_load(const char* path, epi_config** out) {
  if (!path || !out) return invalid("epi_config_load: null argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = new epi_config{config::load_run_config(path)};
    *out = handle;
  });
}

void epi_config_free(epi_config* cfg) { delete cfg; }

epi_status epi_config_set_seed(epi_config* cfg, uint64_t seed) {
  if (!cfg) return invalid("epi_config_set_seed: null config");
  cfg->cfg.seed = seed;
  cfg->cfg.tmcmc.seed = seed;
  if (cfg->cfg.scenario) cfg->cfg.scenario->seed = seed;
  g_last_error.clear();
  return EPI_OK;
}

epi_status epi_config_set_output_dir(epi_config* cfg, const char* dir) {
  if (!cfg || !dir) return invalid("epi_config_set_output_dir: null argument");
  cfg->cfg.output_dir = dir;
  g_last_error.clear();
  return EPI_OK;
}

epi_status epi_config_set_prior_only(epi_config* cfg, int enabled) {
  if (!cfg) return invalid("epi_config_set_prior_only: null config");
  cfg->cfg.prior_only = enabled != 0;
  g_last_error.clear();
  return EPI_OK;
}

epi_status epi_config_set_use_map(epi_config* cfg, int enabled) {
  if (!cfg) return invalid("epi_config_set_use_map: null config");
  cfg->cfg.use_map = enabled != 0;
  g_last_error.clear();
  return EPI_OK;
}

epi_status epi_config_set_horizon(epi_config* cfg, int days) {
  if (!cfg) return invalid("epi_config_set_horizon: null config");
  if (days < 1) return invalid("epi_config_set_horizon: horizon must be at least 1 day");
  cfg->cfg.forecast_horizon = days;
  g_last_error.clear();
  return EPI_OK;
}

epi_status epi_generate(const epi_config* cfg) {
  if (!cfg) return invalid("epi_generate: null config");
  return guarded([&] { workflows::cmd_generate(cfg->cfg); });
}

epi_status epi_ingest(const epi_config* cfg, epi_observations** out) {
  if (!cfg || !out) return invalid("epi_ingest: null argument");
  *out = nullptr;
  return guarded([&] { *out = new epi_observations{workflows::load_observations(cfg->cfg)}; });
}

size_t epi_observations_size(const epi_observations* obs) {
  return obs ? obs->obs.size() : 0;
}

epi_status epi_observations_get(const epi_observations* obs, size_t idx, double* day,
                                double* value) {
  if (!obs || !day || !value) return invalid("epi_observations_get: null argument");
  if (idx >= obs->obs.size()) return invalid("epi_observations_get: index out of range");
  *day = obs->obs.items[idx].day;
  *value = obs->obs.items[idx].value;
  g_last_error.clear();
  return EPI_OK;
}

void epi_observations_free(epi_observations* obs) { delete obs; }

epi_status epi_calibrate(const epi_config* cfg, epi_posterior** out) {
  if (!cfg) return invalid("epi_calibrate: null config");
  if (out) *out = nullptr;
  return guarded([&] {
    auto ens = workflows::cmd_calibrate(cfg->cfg);
    if (out) {
      auto summary = inference::posterior_summary(ens, cfg->cfg.priors);
      *out = new epi_posterior{std::move(ens), std::move(summary)};
    }
  });
}

size_t epi_posterior_size(const epi_posterior* post) {
  return post ? static_cast<size_t>(post->ens.samples.rows()) : 0;
}

epi_status epi_posterior_sample(const epi_posterior* post, size_t idx, double phi[4],
                                double* loglik) {
  if (!post || !phi) return invalid("epi_posterior_sample: null argument");
  if (idx >= static_cast<size_t>(post->ens.samples.rows()) || post->ens.samples.cols() != 4)
    return invalid("epi_posterior_sample: index out of range");
  for (int k = 0; k < 4; ++k) phi[k] = post->ens.samples(static_cast<Eigen::Index>(idx), k);
  if (loglik) *loglik = post->ens.logliks[static_cast<Eigen::Index>(idx)];
  g_last_error.clear();
  return EPI_OK;
}

epi_status epi_posterior_map(const epi_posterior* post, double phi[4]) {
  if (!post || !phi) return invalid("epi_posterior_map: null argument");
  if (post->summary.map_sample.size() != 4)
    return invalid("epi_posterior_map: posterior is not 4-dimensional");
  for (int k = 0; k < 4; ++k) phi[k] = post->summary.map_sample[k];
  g_last_error.clear();
  return EPI_OK;
}

double epi_posterior_log_evidence(const epi_posterior* post) {
  return post ? post->ens.log_evidence : 0.0;
}

void epi_posterior_free(epi_posterior* post) { delete post; }

epi_status epi_smooth(const epi_config* cfg, epi_track** out) {
  if (!cfg) return invalid("epi_smooth: null config");
  if (out) *out = nullptr;
  return guarded([&] {
    auto run = workflows::cmd_smooth(cfg->cfg);
    if (out) {
      auto params = inference::params_from_phi(workflows::resolve_phi(cfg->cfg), cfg->cfg.fixed);
      const long per_day = steps_per_day_checked(params.dt);
      *out = new epi_track{std::move(run), params, per_day};
    }
  });
}

size_t epi_track_days(const epi_track* track) {
  if (!track || track->run.beliefs.empty()) return 0;
  return (track->run.beliefs.size() - 1) / static_cast<size_t>(track->per_day) + 1;
}

epi_status epi_track_day(const epi_track* track, size_t day, double mean[4], double stddev[4],
                         double* re_mean, double* re_std) {
  if (!track || !mean || !stddev) return invalid("epi_track_day: null argument");
  const size_t idx = day * static_cast<size_t>(track->per_day);
  if (idx >= track->run.beliefs.size()) return invalid("epi_track_day: day out of range");
  const auto& b = track->run.beliefs[idx];
  for (int k = 0; k < 4; ++k) {
    mean[k] = b.mean[k];
    stddev[k] = std::sqrt(std::max(0.0, b.cov(k, k)));
  }
  const auto re = filter::re_moments(b, track->params.gamma);
  if (re_mean) *re_mean = re.mean;
  if (re_std) *re_std = std::sqrt(std::max(0.0, re.variance));
  g_last_error.clear();
  return EPI_OK;
}

void epi_track_free(epi_track* track) { delete track; }

epi_status epi_forecast_run(const epi_config* cfg, epi_forecast** out) {
  if (!cfg) return invalid("epi_forecast_run: null config");
  if (out) *out = nullptr;
  return guarded([&] {
    auto fc = workflows::cmd_forecast(cfg->cfg);
    if (out) *out = new epi_forecast{std::move(fc), cfg->cfg.fixed.dt};
  });
}

size_t epi_forecast_size(const epi_forecast* fc) {
  return fc ? fc->fc.points.size() : 0;
}

epi_status epi_forecast_day(const epi_forecast* fc, size_t idx, double* day, double mean[4],
                            double stddev[4], double* re_mean, double* re_std) {
  if (!fc || !mean || !stddev) return invalid("epi_forecast_day: null argument");
  if (idx >= fc->fc.points.size()) return invalid("epi_forecast_day: index out of range");
  const auto& pt = fc->fc.points[idx];
  if (day) *day = fc->fc.start.time_index * fc->dt + pt.day;
  for (int k = 0; k < 4; ++k) {
    mean[k] = pt.belief.mean[k];
    stddev[k] = std::sqrt(std::max(0.0, pt.belief.cov(k, k)));
  }
  if (re_mean) *re_mean = pt.re.mean;
  if (re_std) *re_std = std::sqrt(std::max(0.0, pt.re.variance));
  g_last_error.clear();
  return EPI_OK;
}

void epi_forecast_free(epi_forecast* fc) { delete fc; }

epi_status epi_read_map(const char* summary_path, double phi[4]) {
  if (!summary_path || !phi) return invalid("epi_read_map: null argument");
  return guarded([&] {
    const Eigen::VectorXd v = io::read_map_from_summary(summary_path);
    if (v.size() != 4)
      fail(ErrorKind::Parse, std::string(summary_path) + ": MAP vector is not 4-dimensional");
    for (int k = 0; k < 4; ++k) phi[k] = v[k];
  });
}

}  // extern "C"
