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

#include "progsmooth/qp_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "progsmooth/errors.hpp"

namespace progsmooth::qp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(RowKind kind) {
  switch (kind) {
    case RowKind::kGeneric:
      return "generic";
    case RowKind::kInputBound:
      return "input_bound";
    case RowKind::kStateBound:
      return "state_bound";
    case RowKind::kObstacle:
      return "obstacle";
    case RowKind::kLateralAccel:
      return "lateral_accel";
  }
  return "unknown";
}

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::kOptimal:
      return "optimal";
    case QpStatus::kMaxIter:
      return "max_iter";
    case QpStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

double KktResiduals::max() const {
  return std::max({stationarity, primal, dual, complementarity});
}

void Stage::add_row(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                    double rhs, RowKind kind, double slack_weight) {
  if (row.size() != nw()) throw DimensionError("row width != nx + nu");
  const int m = rows();
  g.conservativeResize(m + 1, nw());
  g.row(m) = row;
  h.conservativeResize(m + 1);
  h[m] = rhs;
  row_kind.push_back(kind);
  if (slack_weight > 0.0) {
    const int ns = slacks();
    slack_cost.conservativeResize(ns + 1);
    slack_cost[ns] = slack_weight;
    slack_of_row.push_back(ns);
  } else {
    slack_of_row.push_back(-1);
  }
}

void QpData::validate() const {
  if (stages.empty()) throw DimensionError("QP needs at least one stage");
  const int n = horizon();
  const int nx = stages.front().nx;
  if (x0.size() != nx) throw DimensionError("x0 size mismatch");
  for (int i = 0; i <= n; ++i) {
    const Stage& st = stages[i];
    if (st.nx != nx) throw DimensionError("state dimension must be constant");
    if (i == n && st.nu != 0) throw DimensionError("terminal stage has inputs");
    const int nw = st.nw();
    if (st.hessian.rows() != nw || st.hessian.cols() != nw ||
        st.gradient.size() != nw) {
      throw DimensionError("cost block size mismatch at stage " +
                           std::to_string(i));
    }
    if (i < n) {
      if (st.a.rows() != nx || st.a.cols() != nx || st.b.rows() != nx ||
          st.b.cols() != st.nu || st.c.size() != nx) {
        throw DimensionError("dynamics size mismatch at stage " +
                             std::to_string(i));
      }
    }
    const int m = st.rows();
    if ((m > 0 && st.g.cols() != nw) || st.g.rows() != m ||
        static_cast<int>(st.slack_of_row.size()) != m ||
        static_cast<int>(st.row_kind.size()) != m) {
      throw DimensionError("inequality size mismatch at stage " +
                           std::to_string(i));
    }
    std::vector<int> owner(st.slacks(), -1);
    for (int r = 0; r < m; ++r) {
      const int j = st.slack_of_row[r];
      if (j < -1 || j >= st.slacks() || (j >= 0 && owner[j] != -1)) {
        throw DimensionError("each slack must belong to exactly one row");
      }
      if (j >= 0) owner[j] = r;
    }
    for (int j = 0; j < st.slacks(); ++j) {
      if (owner[j] < 0) throw DimensionError("unused slack column");
    }
  }
  if (terminal_eq.rows() != terminal_eq_rhs.size() ||
      (terminal_eq.rows() > 0 && terminal_eq.cols() != nx)) {
    throw DimensionError("terminal equality size mismatch");
  }
}

int QpData::count_rows(RowKind kind) const {
  int count = 0;
  for (const Stage& st : stages) {
    count += static_cast<int>(
        std::count(st.row_kind.begin(), st.row_kind.end(), kind));
  }
  return count;
}

double objective(const QpData& qp, const QpSolution& sol) {
  double f = 0.0;
  for (int i = 0; i <= qp.horizon(); ++i) {
    const Stage& st = qp.stages[i];
    VectorXd w(st.nw());
    w.head(st.nx) = sol.x[i];
    if (st.nu > 0) w.tail(st.nu) = sol.u[i];
    f += 0.5 * w.dot(st.hessian * w) + st.gradient.dot(w);
    if (st.slacks() > 0) f += st.slack_cost.dot(sol.slack[i]);
  }
  return f;
}

// Per-stage iterates, Newton right-hand sides, search directions and Riccati
// factors.
struct QpSolver::Workspace {
  struct StageWork {
    // Iterate.
    VectorXd w, sigma, t, lambda, nu, pi;
    // Residuals of the Newton system (KKT residuals for a plain step).
    VectorXd e_stat, e_slack, e_ineq, e_dyn, e_tl, e_sn;
    // Direction.
    VectorXd dw, dsigma, dt, dlambda, dnu, dpi;
    // Saved direction during refinement and the affine predictor.
    VectorXd sw, ssigma, st, slambda, snu, spi;
    VectorXd dt_aff, dlambda_aff, dsigma_aff, dnu_aff;
    // Condensed data and Riccati factors.
    VectorXd weight, rhs;
    MatrixXd m;
    MatrixXd p;
    VectorXd p_vec;
    MatrixXd k_gain;
    VectorXd k_ff;
    MatrixXd fux;
    Eigen::LLT<MatrixXd> fuu;
    MatrixXd ph, kh, dxh, duh;
  };
  std::vector<StageWork> st;
  VectorXd mu, dmu, smu, e_eq;
  Eigen::PartialPivLU<MatrixXd> eq_lu;
};

QpSolver::QpSolver(SolverConfig config)
    : config_(config), work_(std::make_unique<Workspace>()) {}
QpSolver::~QpSolver() = default;
QpSolver::QpSolver(QpSolver&&) noexcept = default;
QpSolver& QpSolver::operator=(QpSolver&&) noexcept = default;

namespace {

// Largest step in (0, 1] keeping v + a dv > 0, scaled by tau.
double max_step(const VectorXd& v, const VectorXd& dv, double tau) {
  double a = 1.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (dv[j] < 0.0) a = std::min(a, -tau * v[j] / dv[j]);
  }
  return a;
}

double inf_norm(const VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

constexpr int kRefinementSteps = 3;
constexpr double kMaxWeight = 1e10;

}  // namespace

QpSolution QpSolver::solve(const QpData& qp) {
  const auto start = std::chrono::steady_clock::now();
  qp.validate();
  const int n = qp.horizon();
  const int nx = qp.stages.front().nx;
  const int neq = static_cast<int>(qp.terminal_eq.rows());
  const double reg = config_.regularization;
  Workspace& ws = *work_;
  ws.st.assign(n + 1, {});

  // Initial point: inputs zero, states by forward simulation, strictly
  // positive slacks and multipliers.
  int n_comp = 0;
  for (int i = 0; i <= n; ++i) {
    const Stage& s = qp.stages[i];
    auto& k = ws.st[i];
    k.w = VectorXd::Zero(s.nw());
    if (i == 0) {
      k.w.head(nx) = qp.x0;
    } else {
      const Stage& prev = qp.stages[i - 1];
      const auto& kp = ws.st[i - 1];
      k.w.head(nx) = prev.a * kp.w.head(nx) + prev.c;
      if (prev.nu > 0) k.w.head(nx) += prev.b * kp.w.tail(prev.nu);
    }
    const int m = s.rows();
    const int ns = s.slacks();
    k.sigma = VectorXd::Ones(ns);
    k.t.resize(m);
    const VectorXd gw = m > 0 ? VectorXd(s.g * k.w) : VectorXd();
    for (int r = 0; r < m; ++r) {
      const int j = s.slack_of_row[r];
      if (j >= 0) k.sigma[j] = std::max(1.0, s.h[r] - gw[r] + 1.0);
      const double res = gw[r] + (j >= 0 ? k.sigma[j] : 0.0) - s.h[r];
      k.t[r] = std::max(res, 1.0);
    }
    k.lambda = VectorXd::Ones(m);
    k.nu = VectorXd::Ones(ns);
    // Soft rows start with their slack stationarity satisfied.
    for (int r = 0; r < m; ++r) {
      const int j = s.slack_of_row[r];
      if (j >= 0 && s.slack_cost[j] > 2.0) {
        k.lambda[r] = 0.5 * s.slack_cost[j];
        k.nu[j] = 0.5 * s.slack_cost[j];
      }
    }
    k.pi = VectorXd::Zero(i < n ? nx : 0);
    n_comp += m + ns;
  }
  ws.mu = VectorXd::Zero(neq);

  QpSolution sol;
  sol.status = QpStatus::kMaxIter;

  // KKT residuals of the current iterate, stored as Newton right-hand sides.
  auto compute_residuals = [&]() {
    KktResiduals res;
    for (int i = 0; i <= n; ++i) {
      const Stage& s = qp.stages[i];
      auto& k = ws.st[i];
      k.e_stat = s.hessian * k.w + s.gradient;
      if (s.rows() > 0) k.e_stat.noalias() -= s.g.transpose() * k.lambda;
      if (i > 0) k.e_stat.head(nx) += ws.st[i - 1].pi;
      if (i < n) {
        k.e_stat.head(nx).noalias() -= s.a.transpose() * k.pi;
        k.e_stat.tail(s.nu).noalias() -= s.b.transpose() * k.pi;
        k.e_dyn = s.a * k.w.head(nx) + s.b * k.w.tail(s.nu) + s.c -
                  ws.st[i + 1].w.head(nx);
        res.primal = std::max(res.primal, inf_norm(k.e_dyn));
      }
      if (i == n && neq > 0) {
        k.e_stat.head(nx).noalias() += qp.terminal_eq.transpose() * ws.mu;
      }
      // x_0 is fixed; its multiplier absorbs the stationarity residual.
      if (i == 0) k.e_stat.head(nx).setZero();
      k.e_slack = s.slack_cost - k.nu;
      k.e_ineq = -k.t - s.h;
      if (s.rows() > 0) k.e_ineq.noalias() += s.g * k.w;
      for (int r = 0; r < s.rows(); ++r) {
        const int j = s.slack_of_row[r];
        if (j >= 0) {
          k.e_slack[j] -= k.lambda[r];
          k.e_ineq[r] += k.sigma[j];
        }
      }
      res.stationarity = std::max(
          {res.stationarity, inf_norm(k.e_stat), inf_norm(k.e_slack)});
      res.primal = std::max(res.primal, inf_norm(k.e_ineq));
      if (s.rows() > 0) {
        res.complementarity = std::max(
            res.complementarity, k.t.cwiseProduct(k.lambda).maxCoeff());
        res.dual = std::max(res.dual, std::max(0.0, -k.lambda.minCoeff()));
      }
      if (s.slacks() > 0) {
        res.complementarity = std::max(
            res.complementarity, k.sigma.cwiseProduct(k.nu).maxCoeff());
        res.dual = std::max(res.dual, std::max(0.0, -k.nu.minCoeff()));
      }
    }
    if (neq > 0) {
      ws.e_eq = qp.terminal_eq * ws.st[n].w.head(nx) - qp.terminal_eq_rhs;
      res.primal = std::max(res.primal, inf_norm(ws.e_eq));
    }
    return res;
  };

  // Builds the condensed stage Hessians and factorizes the Riccati
  // recursion. Returns false if a block fails to factorize.
  auto factorize = [&]() -> bool {
    for (int i = 0; i <= n; ++i) {
      const Stage& s = qp.stages[i];
      auto& k = ws.st[i];
      const int m = s.rows();
      k.weight.resize(m);
      for (int r = 0; r < m; ++r) {
        const int j = s.slack_of_row[r];
        if (j >= 0) {
          k.weight[r] = 1.0 / (k.sigma[j] / k.nu[j] + k.t[r] / k.lambda[r]);
        } else {
          k.weight[r] = k.lambda[r] / k.t[r];
        }
        // Uncapped weights of strongly active rows make the Riccati
        // recursion indefinite in floating point; refinement absorbs the cap.
        k.weight[r] = std::min(k.weight[r], kMaxWeight);
      }
      k.m = s.hessian;
      if (m > 0) k.m.noalias() += s.g.transpose() * k.weight.asDiagonal() * s.g;
      k.m.diagonal().array() += reg;
    }
    auto& last = ws.st[n];
    last.p = last.m.topLeftCorner(nx, nx);
    for (int i = n - 1; i >= 0; --i) {
      const Stage& s = qp.stages[i];
      auto& k = ws.st[i];
      const MatrixXd& pn = ws.st[i + 1].p;
      const int nu = s.nu;
      const MatrixXd pa = pn * s.a;
      const MatrixXd pb = pn * s.b;
      MatrixXd fuu = k.m.bottomRightCorner(nu, nu);
      fuu.noalias() += s.b.transpose() * pb;
      k.fux = k.m.bottomLeftCorner(nu, nx);
      k.fux.noalias() += s.b.transpose() * pa;
      k.fuu.compute(fuu);
      if (k.fuu.info() != Eigen::Success) return false;
      k.k_gain = -k.fuu.solve(k.fux);
      k.p = k.m.topLeftCorner(nx, nx);
      k.p.noalias() += s.a.transpose() * pa;
      k.p.noalias() += k.fux.transpose() * k.k_gain;
      k.p = 0.5 * (k.p + k.p.transpose()).eval();
    }
    if (neq > 0) {
      // Sensitivity of the trajectory w.r.t. the equality multiplier.
      last.ph = qp.terminal_eq.transpose();
      for (int i = n - 1; i >= 0; --i) {
        const Stage& s = qp.stages[i];
        auto& k = ws.st[i];
        const MatrixXd& phn = ws.st[i + 1].ph;
        k.kh = -k.fuu.solve(s.b.transpose() * phn);
        k.ph = s.a.transpose() * phn + k.fux.transpose() * k.kh;
      }
      ws.st[0].dxh = MatrixXd::Zero(nx, neq);
      for (int i = 0; i < n; ++i) {
        const Stage& s = qp.stages[i];
        auto& k = ws.st[i];
        k.duh = k.k_gain * k.dxh + k.kh;
        ws.st[i + 1].dxh = s.a * k.dxh + s.b * k.duh;
      }
      ws.eq_lu.compute(qp.terminal_eq * last.dxh);
      const double det = ws.eq_lu.determinant();
      if (!std::isfinite(det) || std::abs(det) < 1e-300) return false;
    }
    return true;
  };

  // Solves K d = -e for the residual blocks e_* into the d* fields.
  auto solve_direction = [&]() {
    for (int i = 0; i <= n; ++i) {
      const Stage& s = qp.stages[i];
      auto& k = ws.st[i];
      const int m = s.rows();
      k.rhs.resize(m);
      for (int r = 0; r < m; ++r) {
        const int j = s.slack_of_row[r];
        double v = -k.e_ineq[r] - k.e_tl[r] / k.lambda[r];
        if (j >= 0) v += (k.e_sn[j] + k.sigma[j] * k.e_slack[j]) / k.nu[j];
        k.rhs[r] = v;
      }
      k.p_vec = k.e_stat;
      if (m > 0) {
        k.p_vec.noalias() -= s.g.transpose() * k.weight.cwiseProduct(k.rhs);
      }
    }
    // Backward sweep for the linear terms; p_vec holds the stage gradient on
    // entry and the value-function gradient on exit.
    ws.st[n].p_vec.conservativeResize(nx);
    for (int i = n - 1; i >= 0; --i) {
      const Stage& s = qp.stages[i];
      auto& k = ws.st[i];
      const auto& kn = ws.st[i + 1];
      const VectorXd v = kn.p * k.e_dyn + kn.p_vec;
      const VectorXd fu = k.p_vec.tail(s.nu) + s.b.transpose() * v;
      k.k_ff = -k.fuu.solve(fu);
      VectorXd p = k.p_vec.head(nx) + s.a.transpose() * v +
                   k.fux.transpose() * k.k_ff;
      k.p_vec = std::move(p);
    }
    // Forward sweep.
    ws.st[0].dw = VectorXd::Zero(qp.stages[0].nw());
    for (int i = 0; i < n; ++i) {
      const Stage& s = qp.stages[i];
      auto& k = ws.st[i];
      k.dw.tail(s.nu) = k.k_gain * k.dw.head(nx) + k.k_ff;
      auto& kn = ws.st[i + 1];
      kn.dw = VectorXd::Zero(qp.stages[i + 1].nw());
      kn.dw.head(nx) = s.a * k.dw.head(nx) + s.b * k.dw.tail(s.nu) + k.e_dyn;
    }
    if (neq > 0) {
      ws.dmu = ws.eq_lu.solve(-ws.e_eq - qp.terminal_eq * ws.st[n].dw.head(nx));
      for (int i = 0; i <= n; ++i) {
        const Stage& s = qp.stages[i];
        auto& k = ws.st[i];
        k.dw.head(nx) += k.dxh * ws.dmu;
        if (i < n) k.dw.tail(s.nu) += k.duh * ws.dmu;
        k.p_vec += k.ph * ws.dmu;
      }
    }
    for (int i = 0; i < n; ++i) {
      const auto& kn = ws.st[i + 1];
      ws.st[i].dpi = -(kn.p * kn.dw.head(nx) + kn.p_vec);
    }
    // Recover the inequality directions.
    for (int i = 0; i <= n; ++i) {
      const Stage& s = qp.stages[i];
      auto& k = ws.st[i];
      const int m = s.rows();
      k.dlambda.resize(m);
      k.dt.resize(m);
      k.dsigma = VectorXd::Zero(s.slacks());
      k.dnu = VectorXd::Zero(s.slacks());
      if (m == 0) continue;
      const VectorXd gdw = s.g * k.dw;
      for (int r = 0; r < m; ++r) {
        k.dlambda[r] = k.weight[r] * (k.rhs[r] - gdw[r]);
        k.dt[r] = (-k.e_tl[r] - k.t[r] * k.dlambda[r]) / k.lambda[r];
        const int j = s.slack_of_row[r];
        if (j >= 0) {
          k.dnu[j] = k.e_slack[j] - k.dlambda[r];
          k.dsigma[j] = (-k.e_sn[j] - k.sigma[j] * k.dnu[j]) / k.nu[j];
        }
      }
    }
  };

  // Replaces e_* by the residual of K d + e for the current direction and
  // returns its infinity norm.
  auto linear_residual = [&]() {
    double norm = 0.0;
    for (int i = 0; i <= n; ++i) {
      const Stage& s = qp.stages[i];
      auto& k = ws.st[i];
      k.e_stat.noalias() += s.hessian * k.dw;
      if (s.rows() > 0) k.e_stat.noalias() -= s.g.transpose() * k.dlambda;
      if (i > 0) k.e_stat.head(nx) += ws.st[i - 1].dpi;
      if (i < n) {
        k.e_stat.head(nx).noalias() -= s.a.transpose() * k.dpi;
        k.e_stat.tail(s.nu).noalias() -= s.b.transpose() * k.dpi;
        k.e_dyn.noalias() += s.a * k.dw.head(nx) + s.b * k.dw.tail(s.nu);
        k.e_dyn -= ws.st[i + 1].dw.head(nx);
        norm = std::max(norm, inf_norm(k.e_dyn));
      }
      if (i == n && neq > 0) {
        k.e_stat.head(nx).noalias() += qp.terminal_eq.transpose() * ws.dmu;
      }
      if (i == 0) k.e_stat.head(nx).setZero();
      k.e_slack -= k.dnu;
      k.e_ineq -= k.dt;
      if (s.rows() > 0) k.e_ineq.noalias() += s.g * k.dw;
      for (int r = 0; r < s.rows(); ++r) {
        const int j = s.slack_of_row[r];
        if (j >= 0) {
          k.e_slack[j] -= k.dlambda[r];
          k.e_ineq[r] += k.dsigma[j];
        }
      }
      k.e_tl += k.lambda.cwiseProduct(k.dt) + k.t.cwiseProduct(k.dlambda);
      k.e_sn += k.nu.cwiseProduct(k.dsigma) + k.sigma.cwiseProduct(k.dnu);
      norm = std::max({norm, inf_norm(k.e_stat), inf_norm(k.e_slack),
                       inf_norm(k.e_ineq), inf_norm(k.e_tl),
                       inf_norm(k.e_sn)});
    }
    if (neq > 0) {
      ws.e_eq += qp.terminal_eq * ws.st[n].dw.head(nx);
      norm = std::max(norm, inf_norm(ws.e_eq));
    }
    return norm;
  };

  auto save_direction = [&]() {
    for (auto& k : ws.st) {
      k.sw = k.dw;
      k.ssigma = k.dsigma;
      k.st = k.dt;
      k.slambda = k.dlambda;
      k.snu = k.dnu;
      k.spi = k.dpi;
    }
    ws.smu = ws.dmu;
  };
  auto add_saved = [&]() {
    for (auto& k : ws.st) {
      k.dw += k.sw;
      k.dsigma += k.ssigma;
      k.dt += k.st;
      k.dlambda += k.slambda;
      k.dnu += k.snu;
      k.dpi += k.spi;
    }
    ws.dmu += ws.smu;
  };

  // Solves with the residual blocks currently in e_*, then refines while the
  // linear residual keeps shrinking. Clobbers e_*.
  auto refined_solve = [&](double target) {
    solve_direction();
    double prev = std::numeric_limits<double>::infinity();
    for (int r = 0; r < kRefinementSteps; ++r) {
      const double res = linear_residual();
      if (!(res > target) || !(res < 0.5 * prev)) break;
      prev = res;
      save_direction();
      solve_direction();
      add_saved();
    }
  };

  auto step_bound = [&](double tau) {
    double a = 1.0;
    for (const auto& k : ws.st) {
      a = std::min({a, max_step(k.t, k.dt, tau),
                    max_step(k.lambda, k.dlambda, tau),
                    max_step(k.sigma, k.dsigma, tau),
                    max_step(k.nu, k.dnu, tau)});
    }
    return a;
  };

  auto set_complementarity_rhs = [&](double shift, bool with_affine) {
    for (auto& k : ws.st) {
      k.e_tl = k.t.cwiseProduct(k.lambda);
      k.e_sn = k.sigma.cwiseProduct(k.nu);
      if (with_affine) {
        k.e_tl += k.dt_aff.cwiseProduct(k.dlambda_aff);
        k.e_sn += k.dsigma_aff.cwiseProduct(k.dnu_aff);
      }
      k.e_tl.array() -= shift;
      k.e_sn.array() -= shift;
    }
  };

  int iter = 0;
  KktResiduals res;
  for (;; ++iter) {
    res = compute_residuals();
    double mu_avg = 0.0;
    for (const auto& k : ws.st) {
      mu_avg += k.t.dot(k.lambda) + k.sigma.dot(k.nu);
    }
    mu_avg = n_comp > 0 ? mu_avg / n_comp : 0.0;

    if (!std::isfinite(res.max())) {
      sol.status = QpStatus::kInfeasible;
      break;
    }
    if (res.max() <= config_.kkt_tol) {
      sol.status = QpStatus::kOptimal;
      break;
    }
    if (iter >= config_.max_iter) {
      sol.status = QpStatus::kMaxIter;
      break;
    }
    double dual_scale = 0.0;
    for (const auto& k : ws.st) {
      dual_scale = std::max({dual_scale, inf_norm(k.lambda), inf_norm(k.nu)});
    }
    // Diverging multipliers, or an interior collapsed onto the boundary
    // while rows are still violated.
    const bool collapsed = mu_avg < config_.kkt_tol * config_.kkt_tol &&
                           res.primal > config_.kkt_tol;
    if (dual_scale > 1e14 || collapsed) {
      sol.status = QpStatus::kInfeasible;
      break;
    }
    if (!factorize()) {
      sol.status = QpStatus::kMaxIter;
      break;
    }
    const double target = 0.1 * config_.kkt_tol;

    // Predictor.
    set_complementarity_rhs(0.0, false);
    refined_solve(target);
    const double a_aff = step_bound(1.0);
    double mu_aff = 0.0;
    for (auto& k : ws.st) {
      mu_aff += (k.t + a_aff * k.dt).dot(k.lambda + a_aff * k.dlambda) +
                (k.sigma + a_aff * k.dsigma).dot(k.nu + a_aff * k.dnu);
      k.dt_aff = k.dt;
      k.dlambda_aff = k.dlambda;
      k.dsigma_aff = k.dsigma;
      k.dnu_aff = k.dnu;
    }
    mu_aff = n_comp > 0 ? mu_aff / n_comp : 0.0;
    const double centering =
        mu_avg > 0.0 ? std::pow(std::clamp(mu_aff / mu_avg, 0.0, 1.0), 3)
                     : 0.0;

    // Corrector, from freshly computed KKT residuals.
    compute_residuals();
    set_complementarity_rhs(centering * mu_avg, true);
    refined_solve(target);
    const double a = step_bound(0.995);

    for (int i = 0; i <= n; ++i) {
      auto& k = ws.st[i];
      k.w += a * k.dw;
      k.t += a * k.dt;
      k.lambda += a * k.dlambda;
      k.sigma += a * k.dsigma;
      k.nu += a * k.dnu;
      if (i < n) k.pi += a * k.dpi;
    }
    if (neq > 0) ws.mu += a * ws.dmu;

    if (config_.trace) {
      sol.trace.push_back({iter, res, mu_avg, a_aff, a, centering});
    }
  }

  sol.x.resize(n + 1);
  sol.u.resize(n);
  sol.slack.resize(n + 1);
  sol.row_dual.resize(n + 1);
  sol.slack_dual.resize(n + 1);
  sol.dyn_dual.resize(n);
  for (int i = 0; i <= n; ++i) {
    const Stage& s = qp.stages[i];
    const auto& k = ws.st[i];
    sol.x[i] = k.w.head(nx);
    if (i < n) {
      sol.u[i] = k.w.tail(s.nu);
      sol.dyn_dual[i] = k.pi;
    }
    sol.slack[i] = k.sigma;
    sol.row_dual[i] = k.lambda;
    sol.slack_dual[i] = k.nu;
  }
  sol.eq_dual = ws.mu;
  sol.objective = objective(qp, sol);
  sol.stats.iterations = iter;
  sol.stats.residuals = res;
  sol.stats.solve_time_s = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
  return sol;
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out) {
  out << "iteration,stationarity,primal,dual,complementarity,mu,"
         "step_affine,step,centering\n";
  out.precision(17);
  for (const TraceRow& row : trace) {
    out << row.iteration << ',' << row.residuals.stationarity << ','
        << row.residuals.primal << ',' << row.residuals.dual << ','
        << row.residuals.complementarity << ',' << row.mu << ','
        << row.step_affine << ',' << row.step << ',' << row.sigma << '\n';
  }
}

}  // namespace progsmooth::qp
