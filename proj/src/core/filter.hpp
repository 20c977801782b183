#pragma once

#include <optional>
#include <vector>

#include "core/model.hpp"
#include "core/observations.hpp"

namespace epifilter::filter {

/// Gaussian belief over the augmented state at one grid time.
/// The covariance is kept symmetric; it is re-symmetrized after every update.
struct GaussianBelief {
  model::Vec4 mean = model::Vec4::Zero();
  model::Mat4 cov = model::Mat4::Zero();
  long time_index = 0;

  model::AugmentedState state() const { return model::AugmentedState::from_vec(mean); }
};

/// Initial-belief standard deviations. Unset entries fall back to the
/// defaults sigma_i = 0.5 * i0_mean, sigma_s = sigma_i,
/// sigma_beta = 0.25 * beta0_mean.
struct InitialBeliefConfig {
  std::optional<double> sigma_s;
  std::optional<double> sigma_i;
  std::optional<double> sigma_beta;
};

/// Innovation record for one processed observation.
struct Innovation {
  long grid_index = 0;
  double residual = 0.0;
  double variance = 0.0;
  double loglik = 0.0;
};

struct FilterOptions {
  model::MeasurementLinearization linearization = model::MeasurementLinearization::Scaled;
  /// When false, only the innovations and the accumulated log-likelihood are
  /// kept. The sampler uses this path; it avoids storing 4x4 covariances at
  /// every grid point of every likelihood evaluation.
  bool record_beliefs = true;
};

/// Output of a full filter pass: the per-grid-point analysis beliefs (equal
/// to the forecast where no observation exists), one innovation record per
/// observation, and the accumulated marginal log-likelihood.
struct FilterRun {
  std::vector<GaussianBelief> beliefs;
  std::vector<Innovation> innovations;
  GaussianBelief final_belief;  // analysis belief at the last grid point
  double loglik = 0.0;
};

/// EKF forecast step: mean through the zero-noise model, covariance through
/// A P A^T + B Q B^T with Q = 1. Result is symmetrized.
GaussianBelief ekf_forecast(const GaussianBelief& belief, const model::StaticParams& p);

struct UpdateResult {
  GaussianBelief belief;
  double loglik_increment = 0.0;
  double residual = 0.0;
  double innovation_variance = 0.0;
};

/// EKF measurement update with scalar innovation algebra. Throws a
/// degenerate-update error when the innovation variance is not positive.
UpdateResult ekf_update(const GaussianBelief& belief, double observation,
                        const model::StaticParams& p,
                        model::MeasurementLinearization lin = model::MeasurementLinearization::Scaled);

/// Builds the starting belief from the sampled static parameters:
/// mean (1 - i0, i0, 0, beta0), diagonal covariance per InitialBeliefConfig.
GaussianBelief initial_belief(const model::StaticParams& p,
                              const InitialBeliefConfig& cfg = {});

/// Runs the filter over the computational grid, alternating forecasts with
/// measurement updates at observation indices. `total_steps` < 0 derives the
/// grid length from the last observation.
FilterRun run_filter(const model::StaticParams& p, const ObservationSeries& obs,
                     const GaussianBelief& init, const FilterOptions& options = {},
                     long total_steps = -1);

/// Delta-method moments of R_e for a belief.
inline model::ReMoments re_moments(const GaussianBelief& belief, double gamma) {
  return model::re_moments(belief.mean, belief.cov, gamma);
}

}  // namespace epifilter::filter
