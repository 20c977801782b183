#include "core/config.hpp"

#include <filesystem>
#include <initializer_list>

#include "json.hpp"

#include "core/errors.hpp"

namespace epifilter::config {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) fail(ErrorKind::Config, "config: unknown key '" + where + key + "'");
  }
}

double num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(ErrorKind::Config, std::string("config: '") + key + "' must be a number");
  return obj[key].get<double>();
}

int integer(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    fail(ErrorKind::Config, std::string("config: '") + key + "' must be an integer");
  return obj[key].get<int>();
}

bool boolean(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean())
    fail(ErrorKind::Config, std::string("config: '") + key + "' must be a boolean");
  return obj[key].get<bool>();
}

std::string text(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string())
    fail(ErrorKind::Config, std::string("config: '") + key + "' must be a string");
  return obj[key].get<std::string>();
}

synthgen::ScenarioConfig parse_scenario(const json& j, std::uint64_t run_seed, double run_dt) {
  check_keys(j, "scenario.",
             {"kind", "duration", "obs_days", "obs_per_day", "dt", "seed", "rho_true",
              "q_eps_true", "gamma", "beta0", "i0", "q_xi_true", "amplitude", "period", "phase",
              "drop_depth", "onset_day", "onset_width", "recovery_day", "recovery_width"});
  synthgen::ScenarioConfig cfg;
  if (!j.contains("kind")) fail(ErrorKind::Config, "config: 'scenario.kind' is required");
  cfg.kind = synthgen::scenario_from_name(text(j, "kind", ""));
  cfg.duration = integer(j, "duration", cfg.duration);
  if (j.contains("obs_days")) cfg.obs_days = integer(j, "obs_days", cfg.duration);
  cfg.obs_per_day = integer(j, "obs_per_day", cfg.obs_per_day);
  cfg.dt = num(j, "dt", run_dt);
  cfg.seed = j.contains("seed") ? static_cast<std::uint64_t>(j["seed"].get<std::int64_t>())
                                : run_seed;
  cfg.rho_true = num(j, "rho_true", cfg.rho_true);
  cfg.q_eps_true = num(j, "q_eps_true", cfg.q_eps_true);
  cfg.gamma = num(j, "gamma", cfg.gamma);
  if (j.contains("beta0")) cfg.beta0 = num(j, "beta0", 0.0);
  cfg.i0 = num(j, "i0", cfg.i0);
  cfg.q_xi_true = num(j, "q_xi_true", cfg.q_xi_true);
  cfg.amplitude = num(j, "amplitude", cfg.amplitude);
  cfg.period = num(j, "period", cfg.period);
  cfg.phase = num(j, "phase", cfg.phase);
  cfg.drop_depth = num(j, "drop_depth", cfg.drop_depth);
  cfg.onset_day = num(j, "onset_day", cfg.onset_day);
  cfg.onset_width = num(j, "onset_width", cfg.onset_width);
  cfg.recovery_day = num(j, "recovery_day", cfg.recovery_day);
  cfg.recovery_width = num(j, "recovery_width", cfg.recovery_width);
  return cfg;
}

inference::Marginal parse_marginal(const json& j, const std::string& name,
                                   const inference::Marginal& fallback) {
  if (!j.is_object()) fail(ErrorKind::Config, "config: 'priors." + name + "' must be an object");
  check_keys(j, "priors." + name + ".", {"kind", "low", "high", "mean", "std"});
  inference::Marginal m = fallback;
  m.name = name;
  const std::string kind = text(j, "kind", "uniform");
  if (kind == "uniform") {
    m.kind = inference::Marginal::Kind::Uniform;
    m.a = num(j, "low", 0.0);
    m.b = num(j, "high", 1.0);
    if (!(m.b > m.a)) fail(ErrorKind::Config, "config: 'priors." + name + "' needs high > low");
  } else if (kind == "gaussian") {
    m.kind = inference::Marginal::Kind::Gaussian;
    m.a = num(j, "mean", 0.0);
    m.b = num(j, "std", 1.0);
    if (!(m.b > 0.0)) fail(ErrorKind::Config, "config: 'priors." + name + "' needs std > 0");
  } else {
    fail(ErrorKind::Config, "config: 'priors." + name + ".kind' must be uniform or gaussian");
  }
  return m;
}

}  // namespace

void RunConfig::validate() const {
  if (!(population > 0.0)) fail(ErrorKind::Config, "config: 'population' must be positive");
  if (!(dt > 0.0)) fail(ErrorKind::Config, "config: 'dt' must be positive");
  if (dataset && scenario)
    fail(ErrorKind::Config, "config: give either 'dataset' or 'scenario', not both");
  if (forecast_horizon < 1)
    fail(ErrorKind::Config, "config: 'forecast.horizon_days' must be at least 1");
  if (forecast_max_ensemble < 1)
    fail(ErrorKind::Config, "config: 'forecast.max_ensemble' must be at least 1");
  if (dataset && !std::filesystem::exists(*dataset))
    fail(ErrorKind::Config, "config: dataset path '" + *dataset + "' does not exist");
}

RunConfig load_run_config(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, path + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::Config, "config: top level must be an object");
  check_keys(j, "",
             {"dataset", "scenario", "population", "dt", "seed", "output_dir", "start_date",
              "model", "priors", "tmcmc", "initial_belief", "filter", "params", "forecast"});

  RunConfig cfg;
  cfg.population = num(j, "population", cfg.population);
  cfg.dt = num(j, "dt", cfg.dt);
  if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(j["seed"].get<std::int64_t>());
  cfg.output_dir = text(j, "output_dir", cfg.output_dir);
  if (j.contains("start_date")) cfg.start_date = io::parse_date(text(j, "start_date", ""));
  if (j.contains("dataset")) cfg.dataset = text(j, "dataset", "");
  if (j.contains("scenario")) cfg.scenario = parse_scenario(j["scenario"], cfg.seed, cfg.dt);

  cfg.fixed.dt = cfg.dt;
  if (j.contains("model")) {
    const auto& m = j["model"];
    check_keys(m, "model.", {"gamma", "q_eps"});
    cfg.fixed.gamma = num(m, "gamma", cfg.fixed.gamma);
    cfg.fixed.q_eps = num(m, "q_eps", cfg.fixed.q_eps);
  }

  if (j.contains("priors")) {
    const auto& p = j["priors"];
    check_keys(p, "priors.", {"rho", "q_xi", "beta0_mean", "i0_mean"});
    for (auto& m : cfg.priors.marginals)
      if (p.contains(m.name)) m = parse_marginal(p[m.name], m.name, m);
  }

  if (j.contains("tmcmc")) {
    const auto& t = j["tmcmc"];
    check_keys(t, "tmcmc.",
               {"n_samples", "seed", "cov_target", "proposal_scale", "max_stages", "threads",
                "chain_burn_in"});
    cfg.tmcmc.n_samples = integer(t, "n_samples", cfg.tmcmc.n_samples);
    cfg.tmcmc.cov_target = num(t, "cov_target", cfg.tmcmc.cov_target);
    cfg.tmcmc.proposal_scale = num(t, "proposal_scale", cfg.tmcmc.proposal_scale);
    cfg.tmcmc.max_stages = integer(t, "max_stages", cfg.tmcmc.max_stages);
    cfg.tmcmc.threads = integer(t, "threads", cfg.tmcmc.threads);
    cfg.tmcmc.chain_burn_in = integer(t, "chain_burn_in", cfg.tmcmc.chain_burn_in);
    if (t.contains("seed"))
      cfg.tmcmc.seed = static_cast<std::uint64_t>(t["seed"].get<std::int64_t>());
  }

  if (j.contains("initial_belief")) {
    const auto& b = j["initial_belief"];
    check_keys(b, "initial_belief.", {"sigma_s", "sigma_i", "sigma_beta"});
    if (b.contains("sigma_s")) cfg.initial_belief.sigma_s = num(b, "sigma_s", 0.0);
    if (b.contains("sigma_i")) cfg.initial_belief.sigma_i = num(b, "sigma_i", 0.0);
    if (b.contains("sigma_beta")) cfg.initial_belief.sigma_beta = num(b, "sigma_beta", 0.0);
  }

  if (j.contains("filter")) {
    const auto& f = j["filter"];
    check_keys(f, "filter.", {"unscaled_measurement_jacobians"});
    cfg.linearization = boolean(f, "unscaled_measurement_jacobians", false)
                            ? model::MeasurementLinearization::Unscaled
                            : model::MeasurementLinearization::Scaled;
  }

  if (j.contains("params")) {
    const auto& p = j["params"];
    check_keys(p, "params.", {"rho", "q_xi", "beta0_mean", "i0_mean"});
    for (const char* key : {"rho", "q_xi", "beta0_mean", "i0_mean"})
      if (!p.contains(key))
        fail(ErrorKind::Config, std::string("config: 'params.") + key + "' is required");
    cfg.params = Eigen::Vector4d(num(p, "rho", 0.0), num(p, "q_xi", 0.0),
                                 num(p, "beta0_mean", 0.0), num(p, "i0_mean", 0.0));
  }

  if (j.contains("forecast")) {
    const auto& f = j["forecast"];
    check_keys(f, "forecast.", {"horizon_days", "posterior_ensemble", "max_ensemble"});
    cfg.forecast_horizon = integer(f, "horizon_days", cfg.forecast_horizon);
    cfg.forecast_posterior_ensemble =
        boolean(f, "posterior_ensemble", cfg.forecast_posterior_ensemble);
    cfg.forecast_max_ensemble = integer(f, "max_ensemble", cfg.forecast_max_ensemble);
  }

  // The sampler seed follows the run seed unless pinned explicitly.
  if (!j.contains("tmcmc") || !j["tmcmc"].contains("seed")) cfg.tmcmc.seed = cfg.seed;

  cfg.validate();
  return cfg;
}

}  // namespace epifilter::config
