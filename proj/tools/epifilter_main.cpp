// Command-line front end. Everything goes through the public C interface so
// the binary doubles as a smoke test of the shared-library surface.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"

#include "epifilter/epifilter.h"

namespace {

struct ConfigDeleter {
  void operator()(epi_config* c) const { epi_config_free(c); }
};
using ConfigHandle = std::unique_ptr<epi_config, ConfigDeleter>;

int exit_code(epi_status st) {
  switch (st) {
    case EPI_OK:
      return 0;
    case EPI_ERR_NUMERICAL:
      return 2;
    case EPI_ERR_INVALID:
    default:
      return 1;
  }
}

int report(epi_status st) {
  if (st != EPI_OK) std::fprintf(stderr, "epifilter: %s\n", epi_last_error());
  return exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint state/parameter estimation for stochastic SIR models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(epi_version()));

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool use_map = false;
  bool prior_only = false;
  int horizon = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
    cmd->add_option("--seed", seed, "Random seed (overrides the config)")
        ->each([&](const std::string&) { seed_given = true; });
  };

  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic dataset and its truth");
  add_common(generate);

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "Sample the static-parameter posterior from the data");
  add_common(calibrate);
  calibrate->add_flag("--prior-only", prior_only,
                      "Replace the likelihood with a constant (sampler smoke mode)");

  CLI::App* smooth = app.add_subcommand("smooth", "Track states at fixed static parameters");
  add_common(smooth);
  smooth->add_flag("--map", use_map, "Use the MAP from <out>/summary.json");

  CLI::App* forecast = app.add_subcommand("forecast", "Propagate the final belief forward");
  add_common(forecast);
  forecast->add_flag("--map", use_map, "Use the MAP from <out>/summary.json");
  forecast->add_option("--horizon", horizon, "Forecast horizon in days (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  epi_config* raw = nullptr;
  epi_status st = epi_config_load(config_path.c_str(), &raw);
  if (st != EPI_OK) return report(st);
  ConfigHandle cfg(raw);

  if (!out_dir.empty()) {
    st = epi_config_set_output_dir(cfg.get(), out_dir.c_str());
    if (st != EPI_OK) return report(st);
  }
  if (seed_given) {
    st = epi_config_set_seed(cfg.get(), seed);
    if (st != EPI_OK) return report(st);
  }

  if (generate->parsed()) {
    return report(epi_generate(cfg.get()));
  }

  if (calibrate->parsed()) {
    if (prior_only) {
      st = epi_config_set_prior_only(cfg.get(), 1);
      if (st != EPI_OK) return report(st);
    }
    epi_posterior* post = nullptr;
    st = epi_calibrate(cfg.get(), &post);
    if (st == EPI_OK) {
      double phi[4] = {0, 0, 0, 0};
      if (epi_posterior_map(post, phi) == EPI_OK)
        std::printf("samples=%zu log_evidence=%.6g map: rho=%.6g q_xi=%.6g beta0=%.6g i0=%.6g\n",
                    epi_posterior_size(post), epi_posterior_log_evidence(post), phi[0], phi[1],
                    phi[2], phi[3]);
      epi_posterior_free(post);
    }
    return report(st);
  }

  if (smooth->parsed()) {
    if (use_map) {
      st = epi_config_set_use_map(cfg.get(), 1);
      if (st != EPI_OK) return report(st);
    }
    epi_track* track = nullptr;
    st = epi_smooth(cfg.get(), &track);
    if (st == EPI_OK) {
      std::printf("tracked days=%zu\n", epi_track_days(track));
      epi_track_free(track);
    }
    return report(st);
  }

  if (forecast->parsed()) {
    if (use_map) {
      st = epi_config_set_use_map(cfg.get(), 1);
      if (st != EPI_OK) return report(st);
    }
    if (horizon > 0) {
      st = epi_config_set_horizon(cfg.get(), horizon);
      if (st != EPI_OK) return report(st);
    } else if (forecast->count("--horizon") > 0) {
      std::fprintf(stderr, "epifilter: --horizon must be at least 1 day\n");
      return 1;
    }
    epi_forecast* fc = nullptr;
    st = epi_forecast_run(cfg.get(), &fc);
    if (st == EPI_OK) {
      std::printf("forecast marks=%zu\n", epi_forecast_size(fc));
      epi_forecast_free(fc);
    }
    return report(st);
  }

  return 1;
}
