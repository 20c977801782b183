#pragma once

#include <Eigen/Dense>

#include "core/errors.hpp"

namespace epifilter::model {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using RowVec4 = Eigen::Matrix<double, 1, 4>;

/// Augmented SIR state: compartments as population fractions plus the
/// time-varying infection rate beta [1/day].
struct AugmentedState {
  double s = 0.0;
  double i = 0.0;
  double r = 0.0;
  double beta = 0.0;

  Vec4 vec() const { return Vec4(s, i, r, beta); }

  static AugmentedState from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

  bool finite() const {
    return std::isfinite(s) && std::isfinite(i) && std::isfinite(r) && std::isfinite(beta);
  }
};

/// Time-invariant parameters. The first four (rho, q_xi, beta0_mean, i0_mean)
/// form the sampled set; gamma, q_eps and dt are fixed constants.
struct StaticParams {
  double rho = 0.25;         // detection ratio, dimensionless
  double q_xi = 0.005;       // artificial noise strength on beta [1/day^(3/2)]
  double beta0_mean = 0.12;  // initial beta mean [1/day]
  double i0_mean = 1e-3;     // initial infectious fraction
  double gamma = 1.0 / 14.0; // recovery rate [1/day], fixed
  double q_eps = 0.05;       // multiplicative measurement noise strength, fixed
  double dt = 0.1;           // integration step [day]

  void validate() const {
    if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
    if (!(gamma > 0.0)) fail(ErrorKind::InvalidArgument, "gamma must be positive");
    if (q_eps < 0.0) fail(ErrorKind::InvalidArgument, "q_eps must be non-negative");
  }
};

/// Jacobians of the model operator: 4x4 state Jacobian and 4x1 noise Jacobian.
struct ModelJacobians {
  Mat4 a;
  Vec4 b;
};

/// Jacobians of the measurement operator: 1x4 state Jacobian and scalar noise
/// Jacobian.
struct MeasurementJacobians {
  RowVec4 c;
  double d;
};

/// The measurement operator is d = rho * i * (1 + eps); differentiating it
/// gives C = (0, rho, 0, 0) and D = rho * i. `Unscaled` drops the rho factor
/// from both Jacobians (C = (0, 1, 0, 0), D = i), kept as a compatibility
/// switch.
enum class MeasurementLinearization { Scaled, Unscaled };

/// One forward-Euler step of the augmented dynamics. The infection and
/// removal increments enter s, i, r with cancelling signs, so s+i+r is
/// preserved to machine precision. `noise` is a standard-normal draw (or
/// zero) scaling the beta random-walk increment q_xi*sqrt(dt).
AugmentedState step_model(const AugmentedState& x, const StaticParams& p, double noise);

/// Analytic Jacobians of step_model evaluated at x with zero noise.
ModelJacobians jacobians_model(const AugmentedState& x, const StaticParams& p);

/// Measurement operator: detected active-case fraction rho * i * (1 + eps).
double measure(const AugmentedState& x, double rho, double eps);

/// Analytic Jacobians of the measurement operator at the forecast state.
MeasurementJacobians jacobians_measurement(
    const AugmentedState& x_forecast, double rho,
    MeasurementLinearization lin = MeasurementLinearization::Scaled);

/// Effective reproduction number R_e = s * beta / gamma.
double effective_reproduction(double s, double beta, double gamma);

struct ReMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// First-order (delta-method) moments of R_e = S * beta / gamma under a
/// Gaussian state belief: mean S*beta/gamma, variance
/// (beta^2 P_SS + S^2 P_bb + 2 S beta P_Sb) / gamma^2.
ReMoments re_moments(const Vec4& mean, const Mat4& cov, double gamma);

}  // namespace epifilter::model
