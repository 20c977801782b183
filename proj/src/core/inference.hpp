#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "core/filter.hpp"
#include "core/model.hpp"
#include "core/observations.hpp"
#include "core/rng.hpp"

namespace epifilter::inference {

/// Independent 1-D prior marginal.
struct Marginal {
  enum class Kind { Uniform, Gaussian };
  Kind kind = Kind::Uniform;
  double a = 0.0;  // uniform: lower bound; gaussian: mean
  double b = 1.0;  // uniform: upper bound; gaussian: standard deviation
  std::string name;

  double log_density(double x) const;
  double sample(Rng& rng) const;
};

/// Product prior over the sampled parameter vector.
struct PriorSpec {
  std::vector<Marginal> marginals;

  int dim() const { return static_cast<int>(marginals.size()); }

  /// Default priors over (rho, q_xi, beta0_mean, i0_mean): U(0,1) each.
  static PriorSpec sir_default();
};

double log_prior(const Eigen::VectorXd& phi, const PriorSpec& prior);

struct StageDiagnostics {
  double exponent = 0.0;        // tempering exponent after the stage
  double log_mean_weight = 0.0; // stage contribution to the log-evidence
  double weight_cov = 0.0;      // coefficient of variation of plausibility weights
  double acceptance_rate = 0.0; // MH acceptance over the stage's mutations
};

/// Weighted/resampled TMCMC output: final-stage samples, per-draw data
/// log-likelihoods, the log-evidence estimate and per-stage diagnostics.
struct PosteriorEnsemble {
  Eigen::MatrixXd samples;   // n_samples x dim, one row per draw
  Eigen::VectorXd logliks;   // data log-likelihood per draw
  double log_evidence = 0.0;
  std::vector<StageDiagnostics> stages;
};

struct TmcmcConfig {
  int n_samples = 2000;
  std::uint64_t seed = 0;
  double cov_target = 1.0;     // target coefficient of variation per stage
  double proposal_scale = 0.2; // proposal covariance = scale^2 * weighted sample covariance
  int chain_burn_in = 10;      // unrecorded warm-up steps per mutation chain
  int max_stages = 64;
  int threads = 0;             // 0: hardware concurrency
};

using LogLikFn = std::function<double(const Eigen::VectorXd&)>;

/// Transitional MCMC (staged tempering from prior to posterior). Stage
/// exponents are chosen by bisection so the plausibility-weight coefficient
/// of variation hits the target. Multinomial resampling is bookkept as a
/// multiplicity per surviving lead; each lead seeds one Metropolis-Hastings
/// chain that is warmed up with `chain_burn_in` unrecorded steps and then
/// records one sample per step until its multiplicity is filled. Chains own
/// disjoint RNG streams and output rows, so results are seed-reproducible
/// for any worker count.
PosteriorEnsemble tmcmc(const PriorSpec& prior, const LogLikFn& loglik, const TmcmcConfig& cfg);

inline PosteriorEnsemble tmcmc(const PriorSpec& prior, const LogLikFn& loglik, int n_samples,
                               std::uint64_t seed) {
  TmcmcConfig cfg;
  cfg.n_samples = n_samples;
  cfg.seed = seed;
  return tmcmc(prior, loglik, cfg);
}

struct ParamSummary {
  std::string name;
  double map = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct PosteriorSummary {
  std::vector<ParamSummary> params;
  double log_evidence = 0.0;
  Eigen::VectorXd map_sample;
  double map_log_posterior = 0.0;
};

/// Per-parameter MAP (best posterior-density sample), mean and standard
/// deviation. The ensemble's samples double as pairwise scatter data.
PosteriorSummary posterior_summary(const PosteriorEnsemble& ens, const PriorSpec& prior);

/// Maps a sampled vector (rho, q_xi, beta0_mean, i0_mean) onto StaticParams,
/// keeping the fixed constants from `fixed`.
model::StaticParams params_from_phi(const Eigen::VectorXd& phi, const model::StaticParams& fixed);

Eigen::VectorXd phi_from_params(const model::StaticParams& p);

/// Data log-likelihood of one static-parameter sample: builds the initial
/// belief, runs the filter, returns the accumulated log-likelihood. Filter
/// failures (degenerate updates, divergence) map to -infinity.
double log_likelihood(const model::StaticParams& phi, const ObservationSeries& obs,
                      const filter::InitialBeliefConfig& init_cfg = {},
                      model::MeasurementLinearization lin = model::MeasurementLinearization::Scaled);

}  // namespace epifilter::inference
