#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/filter.hpp"
#include "core/model.hpp"
#include "core/observations.hpp"

namespace epifilter::forecast {

struct ForecastPoint {
  double day = 0.0;  // days since the forecast start (1..horizon)
  filter::GaussianBelief belief;
  model::ReMoments re;
};

struct ForecastResult {
  filter::GaussianBelief start;  // the analysis belief the forecast grew from
  std::vector<ForecastPoint> points;
};

/// Propagates `belief` forward horizon_days with zero process-noise mean and
/// the full covariance recursion; one recorded mark per day.
ForecastResult run_forecast(const filter::GaussianBelief& belief, const model::StaticParams& p,
                            int horizon_days);

/// Posterior-ensemble variant: re-filters the data at each static-parameter
/// sample (rows of phi_samples, ordered rho/q_xi/beta0_mean/i0_mean), forecasts
/// from each final analysis belief, and reports Gaussian-mixture moments.
ForecastResult run_forecast_posterior(const Eigen::MatrixXd& phi_samples,
                                      const model::StaticParams& fixed,
                                      const ObservationSeries& obs,
                                      const filter::InitialBeliefConfig& init_cfg,
                                      int horizon_days,
                                      const filter::FilterOptions& options = {});

}  // namespace epifilter::forecast
