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

#ifndef PROGSMOOTH_RTI_CONTROLLER_HPP_
#define PROGSMOOTH_RTI_CONTROLLER_HPP_

// Real-time iteration: per sample, shift the previous trajectory, linearize
// once, solve one QP and apply a full step.

#include <functional>
#include <span>
#include <vector>

#include "progsmooth/ocp.hpp"
#include "progsmooth/qp_solver.hpp"

namespace progsmooth::rti {

using ocp::Guess;
using ocp::StateVec;

struct SurroundingVehicle {
  ocp::SvState state;
  ocp::ObstacleParams theta;
};

struct StepTelemetry {
  qp::QpStatus status = qp::QpStatus::kOptimal;
  bool degraded = false;  // QP did not reach the KKT tolerance
  int qp_iterations = 0;
  double qp_time_s = 0.0;
  double step_time_s = 0.0;  // build + solve
  qp::KktResiduals residuals;
  double max_obstacle_slack = 0.0;
  double max_state_slack = 0.0;
  double guess_change = 0.0;  // inf-norm of the applied state step
};

struct ControllerConfig {
  ocp::OcpConfig ocp;
  qp::SolverConfig solver;
};

struct ControllerState {
  ControllerConfig config;
  ocp::AlphaSchedule schedule;
  Guess guess;
  std::vector<Eigen::VectorXd> row_duals;
  std::vector<Eigen::VectorXd> slacks;
  StepTelemetry last;
};

struct FeasibilityViolation {
  int stage = 0;
  int sv = 0;
  double margin = 0.0;  // c(xi) < -tol
};

struct FeasibilityReport {
  bool feasible = true;
  double min_margin = 0.0;
  std::vector<FeasibilityViolation> violations;
};

class Controller {
 public:
  // Called with the guess right after the shift, before the QP update.
  using ShiftHook = std::function<void(const Guess&)>;

  Controller(ControllerConfig config, ocp::AlphaSchedule schedule,
             vehicle::KappaLookup kappa);

  // Constant-speed rollout from x0 under the lane-keeping law, which holds
  // v0 and the initial lateral offset. On a straight road started with zero
  // steering this is u = (F_res(v0), 0).
  void initialize(const StateVec& x0);

  // Shift, then iterate. Returns the first control of the updated guess.
  vehicle::InputVec step(const StateVec& x_hat,
                         std::span<const SurroundingVehicle> svs);

  // One linearize-solve-update cycle on the current guess without shifting.
  vehicle::InputVec iterate(const StateVec& x_hat,
                            std::span<const SurroundingVehicle> svs);

  void set_shift_hook(ShiftHook hook) { shift_hook_ = std::move(hook); }

  const ControllerState& state() const { return state_; }
  const StepTelemetry& telemetry() const { return state_.last; }
  std::vector<ocp::SvPrediction> predictions(
      std::span<const SurroundingVehicle> svs) const;

 private:
  void shift();

  ControllerState state_;
  vehicle::KappaLookup kappa_;
  qp::QpSolver solver_;
  ShiftHook shift_hook_;
  bool initialized_ = false;
};

// Shifted trajectory x'_i = x_{i+1}, x'_N = x_N.
std::vector<StateVec> shifted_states(const Guess& guess);

// Checks c(xi(x'_i); alpha_i) >= -tol for every stage of the shifted
// trajectory against the per-stage predictions.
FeasibilityReport check_recursive_feasibility(
    const Guess& guess, const ocp::AlphaSchedule& schedule,
    std::span<const ocp::SvPrediction> svs, double tol = 1e-6);

}  // namespace progsmooth::rti

#endif  // PROGSMOOTH_RTI_CONTROLLER_HPP_
