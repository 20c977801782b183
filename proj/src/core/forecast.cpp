#include "core/forecast.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace epifilter::forecast {

namespace {

long steps_per_day(double dt) {
  const long steps = std::lround(1.0 / dt);
  if (steps < 1 || std::abs(steps * dt - 1.0) > 1e-6)
    fail(ErrorKind::Alignment,
         "forecast: dt = " + std::to_string(dt) + " does not subdivide a day evenly");
  return steps;
}

}  // namespace

ForecastResult run_forecast(const filter::GaussianBelief& belief, const model::StaticParams& p,
                            int horizon_days) {
  if (horizon_days < 1)
    fail(ErrorKind::InvalidArgument, "forecast: horizon must be at least 1 day");
  p.validate();

  const long per_day = steps_per_day(p.dt);
  ForecastResult out;
  out.start = belief;
  out.points.reserve(horizon_days);

  filter::GaussianBelief b = belief;
  for (long k = 1; k <= static_cast<long>(horizon_days) * per_day; ++k) {
    b = filter::ekf_forecast(b, p);
    if (k % per_day == 0) {
      ForecastPoint pt;
      pt.day = static_cast<double>(k / per_day);
      pt.belief = b;
      pt.re = model::re_moments(b.mean, b.cov, p.gamma);
      out.points.push_back(std::move(pt));
    }
  }
  return out;
}

ForecastResult run_forecast_posterior(const Eigen::MatrixXd& phi_samples,
                                      const model::StaticParams& fixed,
                                      const ObservationSeries& obs,
                                      const filter::InitialBeliefConfig& init_cfg,
                                      int horizon_days,
                                      const filter::FilterOptions& options) {
  if (phi_samples.rows() == 0 || phi_samples.cols() != 4)
    fail(ErrorKind::InvalidArgument,
         "forecast: ensemble needs an N x 4 matrix of static-parameter samples");
  if (horizon_days < 1)
    fail(ErrorKind::InvalidArgument, "forecast: horizon must be at least 1 day");
  if (obs.empty()) fail(ErrorKind::InvalidArgument, "forecast: empty observation series");

  const int n = static_cast<int>(phi_samples.rows());
  std::vector<ForecastResult> members;
  members.reserve(n);
  filter::FilterOptions run_opts = options;
  run_opts.record_beliefs = false;

  for (int m = 0; m < n; ++m) {
    model::StaticParams p = fixed;
    p.rho = phi_samples(m, 0);
    p.q_xi = phi_samples(m, 1);
    p.beta0_mean = phi_samples(m, 2);
    p.i0_mean = phi_samples(m, 3);
    const auto run = filter::run_filter(p, obs, filter::initial_belief(p, init_cfg), run_opts);
    members.push_back(run_forecast(run.final_belief, p, horizon_days));
  }

  // Gaussian-mixture moments across members, mark by mark.
  ForecastResult out;
  out.start = members.front().start;
  out.points.resize(horizon_days);
  for (int day = 0; day < horizon_days; ++day) {
    model::Vec4 mean = model::Vec4::Zero();
    for (const auto& mem : members) mean += mem.points[day].belief.mean;
    mean /= n;

    model::Mat4 cov = model::Mat4::Zero();
    double re_mean = 0.0, re_second = 0.0;
    for (const auto& mem : members) {
      const auto& pt = mem.points[day];
      const model::Vec4 c = pt.belief.mean - mean;
      cov += pt.belief.cov + c * c.transpose();
      re_mean += pt.re.mean;
      re_second += pt.re.variance + pt.re.mean * pt.re.mean;
    }
    cov /= n;
    re_mean /= n;
    re_second /= n;

    auto& pt = out.points[day];
    pt.day = members.front().points[day].day;
    pt.belief.mean = mean;
    pt.belief.cov = 0.5 * (cov + cov.transpose());
    pt.belief.time_index = members.front().points[day].belief.time_index;
    pt.re.mean = re_mean;
    pt.re.variance = std::max(0.0, re_second - re_mean * re_mean);
  }
  return out;
}

}  // namespace epifilter::forecast
