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

#ifndef PROGSMOOTH_QP_SOLVER_HPP_
#define PROGSMOOTH_QP_SOLVER_HPP_

// Stage-structured convex QP
//
//   min  sum_i 1/2 w_i' H_i w_i + g_i' w_i + c_i' sigma_i
//   s.t. x_0 = x0
//        x_{i+1} = A_i x_i + B_i u_i + b_i            i = 0..N-1
//        G_i w_i + S_i sigma_i >= h_i,  sigma_i >= 0   i = 0..N
//        E x_N = e
//
// with w_i = [x_i; u_i] (w_N = x_N) and S_i selecting at most one slack per
// row. Solved by a primal-dual interior-point method whose Newton systems are
// eliminated stage by stage with a Riccati recursion.

#include <Eigen/Core>

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace progsmooth::qp {

enum class RowKind {
  kGeneric,
  kInputBound,
  kStateBound,
  kObstacle,
  kLateralAccel,
};

std::string_view to_string(RowKind kind);

struct Stage {
  int nx = 0;
  int nu = 0;  // 0 on the terminal stage

  Eigen::MatrixXd hessian;   // (nx+nu) x (nx+nu), positive semidefinite
  Eigen::VectorXd gradient;  // nx+nu

  // Dynamics to the next stage (unused on the terminal stage).
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::VectorXd c;

  // One-sided rows G w (+ sigma_j) >= h.
  Eigen::MatrixXd g;
  Eigen::VectorXd h;
  std::vector<int> slack_of_row;  // -1 for hard rows
  std::vector<RowKind> row_kind;
  Eigen::VectorXd slack_cost;     // L1 weight per slack variable

  int rows() const { return static_cast<int>(h.size()); }
  int slacks() const { return static_cast<int>(slack_cost.size()); }
  int nw() const { return nx + nu; }

  // Appends a row; slack_weight > 0 adds a dedicated slack column.
  void add_row(const Eigen::Ref<const Eigen::RowVectorXd>& row, double rhs,
               RowKind kind, double slack_weight = 0.0);
};

struct QpData {
  std::vector<Stage> stages;  // N + 1 entries
  Eigen::VectorXd x0;
  Eigen::MatrixXd terminal_eq;      // E, rows x nx (may be empty)
  Eigen::VectorXd terminal_eq_rhs;  // e

  int horizon() const { return static_cast<int>(stages.size()) - 1; }
  // Throws DimensionError on inconsistent block sizes.
  void validate() const;
  int count_rows(RowKind kind) const;
};

struct SolverConfig {
  double kkt_tol = 1e-8;
  int max_iter = 100;
  double regularization = 1e-9;
  bool trace = false;
};

enum class QpStatus { kOptimal, kMaxIter, kInfeasible };

std::string_view to_string(QpStatus status);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;

  double max() const;
};

struct TraceRow {
  int iteration = 0;
  KktResiduals residuals;
  double mu = 0.0;
  double step_affine = 0.0;
  double step = 0.0;
  double sigma = 0.0;
};

struct QpStats {
  int iterations = 0;
  double solve_time_s = 0.0;
  KktResiduals residuals;
};

struct QpSolution {
  std::vector<Eigen::VectorXd> x;       // N + 1
  std::vector<Eigen::VectorXd> u;       // N
  std::vector<Eigen::VectorXd> slack;   // N + 1, one entry per slack column
  std::vector<Eigen::VectorXd> dyn_dual;    // N, multipliers of x_{i+1} = ...
  std::vector<Eigen::VectorXd> row_dual;    // N + 1, >= 0
  std::vector<Eigen::VectorXd> slack_dual;  // N + 1, >= 0, for sigma >= 0
  Eigen::VectorXd eq_dual;                  // terminal equality
  QpStatus status = QpStatus::kMaxIter;
  QpStats stats;
  double objective = 0.0;
  std::vector<TraceRow> trace;
};

// Objective value of a primal point.
double objective(const QpData& qp, const QpSolution& sol);

// One solver instance per caller; the workspace is reused across solves.
class QpSolver {
 public:
  explicit QpSolver(SolverConfig config = {});
  ~QpSolver();
  QpSolver(QpSolver&&) noexcept;
  QpSolver& operator=(QpSolver&&) noexcept;

  QpSolution solve(const QpData& qp);
  const SolverConfig& config() const { return config_; }

 private:
  struct Workspace;
  SolverConfig config_;
  std::unique_ptr<Workspace> work_;
};

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out);

}  // namespace progsmooth::qp

#endif  // PROGSMOOTH_QP_SOLVER_HPP_
