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

#ifndef PROGSMOOTH_OCP_HPP_
#define PROGSMOOTH_OCP_HPP_

// Multiple-shooting optimal control problem for overtaking and its
// Gauss-Newton linearization into a stage-structured QP.
//
// The QP is posed in deviations from the linearization point: the solver
// variables are dx_i = x_i - x_hat_i and du_i = S^-1 (u_i - u_hat_i), where
// S = diag(force_scale, 1) brings both inputs to comparable magnitudes.

#include <Eigen/Core>

#include <span>
#include <vector>

#include "progsmooth/qp_solver.hpp"
#include "progsmooth/reference_path.hpp"
#include "progsmooth/shape_homotopy.hpp"
#include "progsmooth/vehicle_dynamics.hpp"

namespace progsmooth::ocp {

using vehicle::InputVec;
using vehicle::StateVec;

// Inflated rectangle (SV footprint grown by the ego footprint).
struct ObstacleParams {
  double length = 0.0;  // m, along s
  double width = 0.0;   // m, along n

  void validate() const;
};

// SV state [s, n, beta, v, delta] in Frenet coordinates.
using SvState = StateVec;

struct SvPrediction {
  std::vector<SvState> states;  // N + 1
  ObstacleParams theta;
};

struct AlphaSchedule {
  shape::ShapeKind kind = shape::ShapeKind::kScaledNorm;
  std::vector<double> alphas;  // N + 1
  std::vector<double> widths;  // generating d_bar per stage, empty if constant

  int horizon() const { return static_cast<int>(alphas.size()) - 1; }
  shape::ShapeSpec at(int stage) const { return {kind, alphas.at(stage)}; }
};

struct OcpConfig {
  int horizon = 70;
  double t_d = 0.1;  // s

  // Diagonal weights on [s, n, beta, v, delta] and [F_d, r].
  StateVec q = (StateVec() << 0.0, 5.0, 1.0, 10.0, 10.0).finished();
  StateVec q_terminal = (StateVec() << 0.0, 5.0, 1.0, 10.0, 10.0).finished();
  InputVec r = InputVec(1e-6, 10.0);

  double slack_weight = 1e4;        // L1 weight per obstacle row
  double state_slack_weight = 1e4;  // L1 weight per soft state row
  double force_scale = 1000.0;

  double v_ref = 10.0;       // m/s, set velocity
  double road_width = 10.0;  // m
  double ego_width = 2.0;    // m
  double ego_length = 4.8;   // m

  vehicle::ModelParams model;

  // Sets the lateral tracking weight in both q and q_terminal.
  void set_lateral_weight(double w_n);
  // Largest |n| the ego centre may reach on the road.
  double lateral_limit() const { return 0.5 * (road_width - ego_width); }
  void validate() const;
};

struct Guess {
  std::vector<StateVec> x;  // N + 1
  std::vector<InputVec> u;  // N

  int horizon() const { return static_cast<int>(u.size()); }
};

// Constant-velocity, centreline-parallel propagation.
SvPrediction predict_sv(const SvState& sv, const ObstacleParams& theta, int n,
                        double t_d);

// Linear width schedule d_i = d0 + i/N (dN - d0), alpha_i from the width
// calibration. Throws DomainError unless 1 < d0 <= dN <= sqrt(2).
AlphaSchedule schedule_alpha(shape::ShapeKind kind, double d0, double dn,
                             int n);

// Same alpha on every stage (fixed p-norm and ReLU^2 benchmarks).
AlphaSchedule constant_schedule(shape::ShapeKind kind, double alpha, int n);

// xi = diag(2/l, 2/w) (p - [s_sv, n_sv]).
Eigen::Vector2d normalize_to_obstacle(const Eigen::Vector2d& p,
                                      const SvState& z,
                                      const ObstacleParams& theta);

// Obstacle constraint used in the OCP, c >= 0 outside. The fixed p-norm is
// rescaled by 2^(-1/p) so its ellipse passes through the rectangle corners.
double obstacle_margin(const shape::ShapeSpec& spec, const Eigen::Vector2d& xi);
shape::HalfSpace obstacle_linearization(const shape::ShapeSpec& spec,
                                        const Eigen::Vector2d& xi);

// Reference state of stage i.
StateVec reference_state(const OcpConfig& config, double s0, int stage);

// Gauss-Newton QP at `guess` for the measured state x_meas. The QP's fixed
// initial deviation is x_meas - guess.x[0]. A linearization point on an
// obstacle centre is moved 1e-6 to the left in normalized coordinates. Throws
// DimensionError on guess size mismatch.
qp::QpData build_qp(const Guess& guess, const StateVec& x_meas,
                    const OcpConfig& config, const AlphaSchedule& schedule,
                    std::span<const SvPrediction> svs,
                    const vehicle::KappaLookup& kappa);

// Guess after a full step with the QP solution.
Guess apply_step(const Guess& guess, const qp::QpSolution& sol,
                 const OcpConfig& config);

}  // namespace progsmooth::ocp

#endif  // PROGSMOOTH_OCP_HPP_
