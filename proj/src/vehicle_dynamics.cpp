// Copyright 2026 The progsmooth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "progsmooth/vehicle_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "progsmooth/errors.hpp"

namespace progsmooth::vehicle {
namespace {

constexpr double kSingularTol = 1e-6;

double denominator(const StateVec& x, double kappa) {
  const double d = 1.0 - x[kN] * kappa;
  if (std::abs(d) < kSingularTol) {
    throw SingularityError("Frenet model singular: 1 - n kappa = " +
                           std::to_string(d));
  }
  return d;
}

}  // namespace

void ModelParams::validate() const {
  if (!(wheelbase > 0 && mass > 0 && c_air >= 0 && c_roll >= 0 &&
        sign_smoothing > 0 && v_max > 0 && delta_max > 0 && force_max > 0 &&
        steer_rate_max > 0 && a_lat_max > 0)) {
    throw DomainError("vehicle parameters must be positive");
  }
}

KappaLookup make_lookup(const path::CurvatureProfile& profile) {
  return [profile](double s) { return profile.lookup(s); };
}

double resistance(double v, const ModelParams& params) {
  return params.c_air * v * v +
         params.c_roll * std::tanh(v / params.sign_smoothing);
}

double resistance_dv(double v, const ModelParams& params) {
  const double th = std::tanh(v / params.sign_smoothing);
  return 2.0 * params.c_air * v +
         params.c_roll * (1.0 - th * th) / params.sign_smoothing;
}

StateVec ode_rhs(const StateVec& x, const InputVec& u, double kappa,
                 const ModelParams& params) {
  const double d = denominator(x, kappa);
  const double v = x[kV];
  const double s_dot = v * std::cos(x[kBeta]) / d;
  StateVec dx;
  dx[kS] = s_dot;
  dx[kN] = v * std::sin(x[kBeta]);
  dx[kBeta] = v / params.wheelbase * std::tan(x[kDelta]) - kappa * s_dot;
  dx[kV] = (u[kForce] - resistance(v, params)) / params.mass;
  dx[kDelta] = u[kSteerRate];
  return dx;
}

OdeJacobian ode_jacobian(const StateVec& x, const InputVec& u,
                         const path::CurvatureSample& kappa,
                         const ModelParams& params) {
  (void)u;
  const double k = kappa.kappa;
  const double dk = kappa.dkappa_ds;
  const double d = denominator(x, k);
  const double n = x[kN];
  const double v = x[kV];
  const double cb = std::cos(x[kBeta]);
  const double sb = std::sin(x[kBeta]);
  const double tan_delta = std::tan(x[kDelta]);
  const double s_dot = v * cb / d;

  OdeJacobian j;
  j.dx.setZero();
  j.du.setZero();

  // d(s_dot): d = 1 - n kappa(s).
  const double ds_ds = v * cb * n * dk / (d * d);
  const double ds_dn = v * cb * k / (d * d);
  const double ds_dbeta = -v * sb / d;
  const double ds_dv = cb / d;
  j.dx(kS, kS) = ds_ds;
  j.dx(kS, kN) = ds_dn;
  j.dx(kS, kBeta) = ds_dbeta;
  j.dx(kS, kV) = ds_dv;

  j.dx(kN, kBeta) = v * cb;
  j.dx(kN, kV) = sb;

  j.dx(kBeta, kS) = -dk * s_dot - k * ds_ds;
  j.dx(kBeta, kN) = -k * ds_dn;
  j.dx(kBeta, kBeta) = -k * ds_dbeta;
  j.dx(kBeta, kV) = tan_delta / params.wheelbase - k * ds_dv;
  j.dx(kBeta, kDelta) = v / params.wheelbase * (1.0 + tan_delta * tan_delta);

  j.dx(kV, kV) = -resistance_dv(v, params) / params.mass;
  j.du(kV, kForce) = 1.0 / params.mass;
  j.du(kDelta, kSteerRate) = 1.0;
  return j;
}

StateVec rk4_step(const StateVec& x, const InputVec& u, double t_d,
                  const KappaLookup& kappa, const ModelParams& params) {
  if (!(t_d > 0.0)) throw DomainError("t_d must be positive");
  const StateVec k1 = ode_rhs(x, u, kappa(x[kS]).kappa, params);
  const StateVec x2 = x + 0.5 * t_d * k1;
  const StateVec k2 = ode_rhs(x2, u, kappa(x2[kS]).kappa, params);
  const StateVec x3 = x + 0.5 * t_d * k2;
  const StateVec k3 = ode_rhs(x3, u, kappa(x3[kS]).kappa, params);
  const StateVec x4 = x + t_d * k3;
  const StateVec k4 = ode_rhs(x4, u, kappa(x4[kS]).kappa, params);
  return x + t_d / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

DiscreteLinearization discrete_jacobians(const StateVec& x, const InputVec& u,
                                         double t_d, const KappaLookup& kappa,
                                         const ModelParams& params) {
  if (!(t_d > 0.0)) throw DomainError("t_d must be positive");
  const double h = t_d;
  const StateMat eye = StateMat::Identity();

  const path::CurvatureSample c1 = kappa(x[kS]);
  const StateVec k1 = ode_rhs(x, u, c1.kappa, params);
  const OdeJacobian j1 = ode_jacobian(x, u, c1, params);
  const StateMat k1x = j1.dx;
  const InputMat k1u = j1.du;

  const StateVec x2 = x + 0.5 * h * k1;
  const path::CurvatureSample c2 = kappa(x2[kS]);
  const StateVec k2 = ode_rhs(x2, u, c2.kappa, params);
  const OdeJacobian j2 = ode_jacobian(x2, u, c2, params);
  const StateMat k2x = j2.dx * (eye + 0.5 * h * k1x);
  const InputMat k2u = j2.dx * (0.5 * h * k1u) + j2.du;

  const StateVec x3 = x + 0.5 * h * k2;
  const path::CurvatureSample c3 = kappa(x3[kS]);
  const StateVec k3 = ode_rhs(x3, u, c3.kappa, params);
  const OdeJacobian j3 = ode_jacobian(x3, u, c3, params);
  const StateMat k3x = j3.dx * (eye + 0.5 * h * k2x);
  const InputMat k3u = j3.dx * (0.5 * h * k2u) + j3.du;

  const StateVec x4 = x + h * k3;
  const path::CurvatureSample c4 = kappa(x4[kS]);
  const StateVec k4 = ode_rhs(x4, u, c4.kappa, params);
  const OdeJacobian j4 = ode_jacobian(x4, u, c4, params);
  const StateMat k4x = j4.dx * (eye + h * k3x);
  const InputMat k4u = j4.dx * (h * k3u) + j4.du;

  DiscreteLinearization lin;
  lin.next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  lin.a = eye + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  lin.b = h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  return lin;
}

double lateral_accel(const StateVec& x, const ModelParams& params) {
  return x[kV] * x[kV] * std::tan(x[kDelta]) / params.wheelbase;
}

StateVec lateral_accel_grad(const StateVec& x, const ModelParams& params) {
  const double t = std::tan(x[kDelta]);
  StateVec g = StateVec::Zero();
  g[kV] = 2.0 * x[kV] * t / params.wheelbase;
  g[kDelta] = x[kV] * x[kV] * (1.0 + t * t) / params.wheelbase;
  return g;
}

InputVec lane_keeping_input(const StateVec& x, double n_target,
                            double v_target, double kappa,
                            const ModelParams& params,
                            const TrackingGains& gains) {
  const double delta_des = std::clamp(
      std::atan(params.wheelbase * kappa) - gains.k_n * (x[kN] - n_target) -
          gains.k_beta * x[kBeta],
      -params.delta_max, params.delta_max);
  InputVec u;
  u[kSteerRate] = std::clamp(gains.k_delta * (delta_des - x[kDelta]),
                             -params.steer_rate_max, params.steer_rate_max);
  u[kForce] = std::clamp(resistance(x[kV], params) +
                             params.mass * gains.k_v * (v_target - x[kV]),
                         -params.force_max, params.force_max);
  return u;
}

}  // namespace progsmooth::vehicle
