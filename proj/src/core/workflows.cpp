#include "core/workflows.hpp"

#include <algorithm>
#include <filesystem>

#include "core/errors.hpp"
#include "core/io.hpp"
#include "core/synthgen.hpp"

namespace epifilter::workflows {

namespace {

namespace fs = std::filesystem;

void ensure_output_dir(const config::RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) fail(ErrorKind::Config, "cannot create output directory '" + cfg.output_dir + "'");
}

model::StaticParams resolved_params(const config::RunConfig& cfg) {
  return inference::params_from_phi(resolve_phi(cfg), cfg.fixed);
}

filter::FilterOptions filter_options(const config::RunConfig& cfg, bool record) {
  filter::FilterOptions opts;
  opts.linearization = cfg.linearization;
  opts.record_beliefs = record;
  return opts;
}

}  // namespace

Artifacts Artifacts::in(const std::string& dir) {
  const fs::path base(dir);
  Artifacts a;
  a.data = (base / "data.csv").string();
  a.truth = (base / "truth.csv").string();
  a.meta = (base / "meta.json").string();
  a.posterior = (base / "posterior_samples.csv").string();
  a.summary = (base / "summary.json").string();
  a.states = (base / "states.csv").string();
  a.forecast = (base / "forecast.csv").string();
  return a;
}

ObservationSeries load_observations(const config::RunConfig& cfg) {
  if (cfg.dataset) return io::ingest(*cfg.dataset, cfg.population);
  if (cfg.scenario) return synthgen::generate(*cfg.scenario).observations;
  fail(ErrorKind::Config, "config: either 'dataset' or 'scenario' is required");
}

Eigen::Vector4d resolve_phi(const config::RunConfig& cfg) {
  if (cfg.params) return *cfg.params;
  if (cfg.use_map) {
    const auto summary = Artifacts::in(cfg.output_dir).summary;
    if (!fs::exists(summary))
      fail(ErrorKind::Workflow,
           "--map requested but '" + summary + "' does not exist; run calibrate first");
    const Eigen::VectorXd phi = io::read_map_from_summary(summary);
    if (phi.size() != 4)
      fail(ErrorKind::Parse, "'" + summary + "' holds a MAP of dimension " +
                                 std::to_string(phi.size()) + ", expected 4");
    return phi.head<4>();
  }
  fail(ErrorKind::Workflow,
       "no static parameters: set 'params' in the config or pass --map after calibrate");
}

void cmd_generate(const config::RunConfig& cfg) {
  if (!cfg.scenario) fail(ErrorKind::Config, "generate: config has no 'scenario' block");
  const auto truth = synthgen::generate(*cfg.scenario);
  ensure_output_dir(cfg);
  const auto paths = Artifacts::in(cfg.output_dir);
  io::write_dataset(paths.data, truth.observations, cfg.population, cfg.start_date);
  io::write_truth_csv(paths.truth, truth);
  io::write_meta_json(paths.meta, *cfg.scenario, truth, cfg.population, cfg.start_date);
}

inference::PosteriorEnsemble cmd_calibrate(const config::RunConfig& cfg) {
  const ObservationSeries obs = load_observations(cfg);

  inference::LogLikFn loglik;
  if (cfg.prior_only) {
    loglik = [](const Eigen::VectorXd&) { return 0.0; };
  } else {
    loglik = [&](const Eigen::VectorXd& phi) {
      return inference::log_likelihood(inference::params_from_phi(phi, cfg.fixed), obs,
                                       cfg.initial_belief, cfg.linearization);
    };
  }

  const auto ens = inference::tmcmc(cfg.priors, loglik, cfg.tmcmc);
  const auto summary = inference::posterior_summary(ens, cfg.priors);

  ensure_output_dir(cfg);
  const auto paths = Artifacts::in(cfg.output_dir);
  io::write_posterior_csv(paths.posterior, ens);
  io::write_summary_json(paths.summary, summary, ens.stages);
  return ens;
}

filter::FilterRun cmd_smooth(const config::RunConfig& cfg) {
  const ObservationSeries obs = load_observations(cfg);
  const model::StaticParams p = resolved_params(cfg);
  auto run = filter::run_filter(p, obs, filter::initial_belief(p, cfg.initial_belief),
                                filter_options(cfg, true));
  ensure_output_dir(cfg);
  io::write_states_csv(Artifacts::in(cfg.output_dir).states, run, p);
  return run;
}

forecast::ForecastResult cmd_forecast(const config::RunConfig& cfg) {
  const ObservationSeries obs = load_observations(cfg);
  const auto paths = Artifacts::in(cfg.output_dir);

  forecast::ForecastResult fc;
  double dt = cfg.fixed.dt;
  if (cfg.forecast_posterior_ensemble) {
    if (!fs::exists(paths.posterior))
      fail(ErrorKind::Workflow, "posterior-ensemble forecast requested but '" + paths.posterior +
                                    "' does not exist; run calibrate first");
    const Eigen::MatrixXd table = io::read_posterior_csv(paths.posterior);
    const int n = static_cast<int>(table.rows());
    const int keep = std::min(n, cfg.forecast_max_ensemble);
    const int stride = std::max(1, n / keep);
    Eigen::MatrixXd phis((n + stride - 1) / stride, 4);
    for (int i = 0, row = 0; i < n; i += stride, ++row) phis.row(row) = table.row(i).head<4>();
    fc = forecast::run_forecast_posterior(phis, cfg.fixed, obs, cfg.initial_belief,
                                          cfg.forecast_horizon, filter_options(cfg, false));
  } else {
    const model::StaticParams p = resolved_params(cfg);
    dt = p.dt;
    const auto run = filter::run_filter(p, obs, filter::initial_belief(p, cfg.initial_belief),
                                        filter_options(cfg, false));
    fc = forecast::run_forecast(run.final_belief, p, cfg.forecast_horizon);
  }

  ensure_output_dir(cfg);
  io::write_forecast_csv(paths.forecast, fc, dt);
  return fc;
}

}  // namespace epifilter::workflows
