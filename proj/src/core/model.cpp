#include "core/model.hpp"

#include <cmath>

namespace epifilter::model {

AugmentedState step_model(const AugmentedState& x, const StaticParams& p, double noise) {
  if (!x.finite()) fail(ErrorKind::InvalidArgument, "step_model: non-finite input state");

  const double infection = p.dt * x.beta * x.s * x.i;
  const double removal = p.dt * p.gamma * x.i;

  AugmentedState out;
  out.s = x.s - infection;
  out.i = x.i + (infection - removal);
  out.r = x.r + removal;
  out.beta = x.beta + p.q_xi * std::sqrt(p.dt) * noise;
  return out;
}

ModelJacobians jacobians_model(const AugmentedState& x, const StaticParams& p) {
  if (!x.finite()) fail(ErrorKind::InvalidArgument, "jacobians_model: non-finite input state");

  const double dt = p.dt;
  ModelJacobians jac;
  jac.a << 1.0 - dt * x.i * x.beta, -dt * x.s * x.beta, 0.0, -dt * x.s * x.i,
           dt * x.i * x.beta, 1.0 + dt * (x.s * x.beta - p.gamma), 0.0, dt * x.s * x.i,
           0.0, dt * p.gamma, 1.0, 0.0,
           0.0, 0.0, 0.0, 1.0;
  jac.b << 0.0, 0.0, 0.0, p.q_xi * std::sqrt(dt);
  return jac;
}

double measure(const AugmentedState& x, double rho, double eps) {
  return rho * x.i * (1.0 + eps);
}

MeasurementJacobians jacobians_measurement(const AugmentedState& x_forecast, double rho,
                                           MeasurementLinearization lin) {
  MeasurementJacobians jac;
  if (lin == MeasurementLinearization::Scaled) {
    jac.c << 0.0, rho, 0.0, 0.0;
    jac.d = rho * x_forecast.i;
  } else {
    jac.c << 0.0, 1.0, 0.0, 0.0;
    jac.d = x_forecast.i;
  }
  return jac;
}

double effective_reproduction(double s, double beta, double gamma) {
  if (!(gamma > 0.0)) fail(ErrorKind::InvalidArgument, "effective_reproduction: gamma must be positive");
  return s * beta / gamma;
}

ReMoments re_moments(const Vec4& mean, const Mat4& cov, double gamma) {
  if (!(gamma > 0.0)) fail(ErrorKind::InvalidArgument, "re_moments: gamma must be positive");
  const double s = mean[0];
  const double beta = mean[3];
  const double p_ss = cov(0, 0);
  const double p_bb = cov(3, 3);
  const double p_sb = cov(0, 3);

  ReMoments out;
  out.mean = s * beta / gamma;
  out.variance = (beta * beta * p_ss + s * s * p_bb + 2.0 * s * beta * p_sb) / (gamma * gamma);
  return out;
}

}  // namespace epifilter::model
