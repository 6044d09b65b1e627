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

#ifndef PROGSMOOTH_VEHICLE_DYNAMICS_HPP_
#define PROGSMOOTH_VEHICLE_DYNAMICS_HPP_

// Kinematic single-track model in the Frenet frame of a reference curve,
// x = [s, n, beta, v, delta], u = [F_d, r].

#include <Eigen/Core>

#include <functional>

#include "progsmooth/reference_path.hpp"

namespace progsmooth::vehicle {

inline constexpr int kNx = 5;
inline constexpr int kNu = 2;

using StateVec = Eigen::Matrix<double, kNx, 1>;
using InputVec = Eigen::Matrix<double, kNu, 1>;
using StateMat = Eigen::Matrix<double, kNx, kNx>;
using InputMat = Eigen::Matrix<double, kNx, kNu>;

enum StateIndex : int { kS = 0, kN = 1, kBeta = 2, kV = 3, kDelta = 4 };
enum InputIndex : int { kForce = 0, kSteerRate = 1 };

struct EgoState {
  double s = 0.0;
  double n = 0.0;
  double beta = 0.0;
  double v = 0.0;
  double delta = 0.0;

  StateVec vec() const { return StateVec(s, n, beta, v, delta); }
  static EgoState from(const StateVec& x) { return {x[0], x[1], x[2], x[3], x[4]}; }
};

struct Control {
  double force = 0.0;       // N
  double steer_rate = 0.0;  // rad/s

  InputVec vec() const { return InputVec(force, steer_rate); }
  static Control from(const InputVec& u) { return {u[0], u[1]}; }
};

// Placeholder vehicle data; not taken from any particular car's spec sheet.
struct ModelParams {
  double wheelbase = 2.9;  // m
  double mass = 1160.0;    // kg
  double c_air = 0.7;      // kg/m
  double c_roll = 120.0;   // N
  double sign_smoothing = 0.1;  // m/s, width of tanh(v / w) in F_res

  double v_max = 40.0;          // m/s
  double delta_max = 0.35;      // rad
  double force_max = 8000.0;    // N, symmetric bound on F_d
  double steer_rate_max = 0.6;  // rad/s
  double a_lat_max = 8.0;       // m/s^2

  void validate() const;
};

// Curvature along the path, queried at each RK4 stage.
using KappaLookup = std::function<path::CurvatureSample(double)>;

KappaLookup make_lookup(const path::CurvatureProfile& profile);

// Air and rolling resistance with the smoothed sign.
double resistance(double v, const ModelParams& params);
double resistance_dv(double v, const ModelParams& params);

// Throws SingularityError when |1 - n kappa| < 1e-6.
StateVec ode_rhs(const StateVec& x, const InputVec& u, double kappa,
                 const ModelParams& params);

struct OdeJacobian {
  StateMat dx;
  InputMat du;
};

// Jacobian of ode_rhs, including the dependence of kappa(s) on s.
OdeJacobian ode_jacobian(const StateVec& x, const InputVec& u,
                         const path::CurvatureSample& kappa,
                         const ModelParams& params);

StateVec rk4_step(const StateVec& x, const InputVec& u, double t_d,
                  const KappaLookup& kappa, const ModelParams& params);

struct DiscreteLinearization {
  StateVec next;  // F(x, u)
  StateMat a;     // dF/dx
  InputMat b;     // dF/du
};

// Sensitivities of the RK4 map, propagated through the four stages.
DiscreteLinearization discrete_jacobians(const StateVec& x, const InputVec& u,
                                         double t_d, const KappaLookup& kappa,
                                         const ModelParams& params);

// Proportional lane keeping: steer towards atan(l kappa) corrected by the
// lateral offset and heading errors, and drive the speed to v_target.
struct TrackingGains {
  double k_n = 0.2;      // rad/m
  double k_beta = 1.0;   // rad/rad
  double k_delta = 3.0;  // 1/s
  double k_v = 1.0;      // 1/s
};

// Inputs are clipped to the model bounds.
InputVec lane_keeping_input(const StateVec& x, double n_target,
                            double v_target, double kappa,
                            const ModelParams& params,
                            const TrackingGains& gains = {});

// v^2 tan(delta) / l.
double lateral_accel(const StateVec& x, const ModelParams& params);
StateVec lateral_accel_grad(const StateVec& x, const ModelParams& params);

}  // namespace progsmooth::vehicle

#endif  // PROGSMOOTH_VEHICLE_DYNAMICS_HPP_
