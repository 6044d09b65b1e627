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

#include "progsmooth/rti_controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "progsmooth/errors.hpp"

namespace progsmooth::rti {

using vehicle::InputVec;

Controller::Controller(ControllerConfig config, ocp::AlphaSchedule schedule,
                       vehicle::KappaLookup kappa)
    : kappa_(std::move(kappa)), solver_(config.solver) {
  config.ocp.validate();
  if (schedule.horizon() != config.ocp.horizon) {
    throw DimensionError("alpha schedule length != N+1");
  }
  for (int i = 0; i <= schedule.horizon(); ++i) schedule.at(i).validate();
  state_.config = std::move(config);
  state_.schedule = std::move(schedule);
}

void Controller::initialize(const StateVec& x0) {
  const ocp::OcpConfig& oc = state_.config.ocp;
  const int n = oc.horizon;
  Guess g;
  g.x.assign(n + 1, x0);
  g.u.assign(n, InputVec::Zero());
  for (int i = 0; i < n; ++i) {
    g.u[i] = vehicle::lane_keeping_input(g.x[i], x0[vehicle::kN],
                                         x0[vehicle::kV],
                                         kappa_(g.x[i][vehicle::kS]).kappa,
                                         oc.model);
    g.x[i + 1] = vehicle::rk4_step(g.x[i], g.u[i], oc.t_d, kappa_, oc.model);
  }
  state_.guess = std::move(g);
  state_.row_duals.clear();
  state_.slacks.clear();
  state_.last = {};
  initialized_ = true;
}

void Controller::shift() {
  const ocp::OcpConfig& oc = state_.config.ocp;
  Guess& g = state_.guess;
  const int n = oc.horizon;
  const StateVec last = g.x[n];
  const InputVec u_app(vehicle::resistance(last[vehicle::kV], oc.model), 0.0);
  for (int i = 0; i < n; ++i) g.x[i] = g.x[i + 1];
  for (int i = 0; i + 1 < n; ++i) g.u[i] = g.u[i + 1];
  g.u[n - 1] = u_app;
  g.x[n] = vehicle::rk4_step(last, u_app, oc.t_d, kappa_, oc.model);
}

std::vector<ocp::SvPrediction> Controller::predictions(
    std::span<const SurroundingVehicle> svs) const {
  std::vector<ocp::SvPrediction> out;
  out.reserve(svs.size());
  for (const SurroundingVehicle& sv : svs) {
    out.push_back(ocp::predict_sv(sv.state, sv.theta,
                                  state_.config.ocp.horizon,
                                  state_.config.ocp.t_d));
  }
  return out;
}

InputVec Controller::step(const StateVec& x_hat,
                          std::span<const SurroundingVehicle> svs) {
  if (!initialized_) initialize(x_hat);
  shift();
  if (shift_hook_) shift_hook_(state_.guess);
  return iterate(x_hat, svs);
}

InputVec Controller::iterate(const StateVec& x_hat,
                             std::span<const SurroundingVehicle> svs) {
  if (!initialized_) initialize(x_hat);
  const auto start = std::chrono::steady_clock::now();
  const ocp::OcpConfig& oc = state_.config.ocp;
  const auto preds = predictions(svs);
  const qp::QpData data =
      ocp::build_qp(state_.guess, x_hat, oc, state_.schedule, preds, kappa_);
  qp::QpSolution sol = solver_.solve(data);

  StepTelemetry tel;
  tel.status = sol.status;
  tel.degraded = sol.status != qp::QpStatus::kOptimal;
  tel.qp_iterations = sol.stats.iterations;
  tel.qp_time_s = sol.stats.solve_time_s;
  tel.residuals = sol.stats.residuals;
  if (sol.status == qp::QpStatus::kInfeasible) {
    state_.last = tel;
    throw NumericError("QP reported infeasibility");
  }
  for (int i = 0; i <= data.horizon(); ++i) {
    const qp::Stage& st = data.stages[i];
    for (int r = 0; r < st.rows(); ++r) {
      const int j = st.slack_of_row[r];
      if (j < 0) continue;
      double& target = st.row_kind[r] == qp::RowKind::kObstacle
                           ? tel.max_obstacle_slack
                           : tel.max_state_slack;
      target = std::max(target, sol.slack[i][j]);
    }
    tel.guess_change =
        std::max(tel.guess_change,
                 i == 0 ? 0.0 : sol.x[i].cwiseAbs().maxCoeff());
  }
  Guess next = ocp::apply_step(state_.guess, sol, oc);
  for (const auto& x : next.x) {
    if (!x.allFinite()) throw NumericError("non-finite trajectory after step");
  }
  state_.guess = std::move(next);
  state_.row_duals = std::move(sol.row_dual);
  state_.slacks = std::move(sol.slack);
  tel.step_time_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  state_.last = tel;
  return state_.guess.u[0];
}

std::vector<StateVec> shifted_states(const Guess& guess) {
  std::vector<StateVec> out(guess.x.begin() + 1, guess.x.end());
  out.push_back(guess.x.back());
  return out;
}

FeasibilityReport check_recursive_feasibility(
    const Guess& guess, const ocp::AlphaSchedule& schedule,
    std::span<const ocp::SvPrediction> svs, double tol) {
  const int n = guess.horizon();
  if (schedule.horizon() != n) {
    throw DimensionError("alpha schedule length != N+1");
  }
  FeasibilityReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  const std::vector<StateVec> xs = shifted_states(guess);
  for (int i = 0; i <= n; ++i) {
    const shape::ShapeSpec spec = schedule.at(i);
    for (std::size_t j = 0; j < svs.size(); ++j) {
      const auto& sv = svs[j];
      if (static_cast<int>(sv.states.size()) != n + 1) {
        throw DimensionError("SV prediction length != N+1");
      }
      const Eigen::Vector2d p(xs[i][vehicle::kS], xs[i][vehicle::kN]);
      const Eigen::Vector2d xi =
          ocp::normalize_to_obstacle(p, sv.states[i], sv.theta);
      const double c = ocp::obstacle_margin(spec, xi);
      report.min_margin = std::min(report.min_margin, c);
      if (c < -tol) {
        report.feasible = false;
        report.violations.push_back({i, static_cast<int>(j), c});
      }
    }
  }
  return report;
}

}  // namespace progsmooth::rti
