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

#include <doctest.h>

#include <Eigen/Core>

#include <cmath>
#include <random>
#include <sstream>

#include "progsmooth/errors.hpp"
#include "progsmooth/qp_solver.hpp"
#include "test_support.hpp"

using namespace progsmooth;
using qp::QpData;
using qp::QpSolver;
using qp::QpStatus;
using qp::Stage;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// One-stage problem whose only free variables are the inputs u in R^nu;
// the state is a fixed scalar.
QpData input_only(const MatrixXd& h, const VectorXd& g) {
  const int nu = static_cast<int>(g.size());
  QpData qp;
  qp.x0 = VectorXd::Zero(1);
  Stage s0;
  s0.nx = 1;
  s0.nu = nu;
  s0.hessian = MatrixXd::Zero(1 + nu, 1 + nu);
  s0.hessian.bottomRightCorner(nu, nu) = h;
  s0.gradient = VectorXd::Zero(1 + nu);
  s0.gradient.tail(nu) = g;
  s0.g.resize(0, 1 + nu);
  s0.a = MatrixXd::Zero(1, 1);
  s0.b = MatrixXd::Zero(1, nu);
  s0.c = VectorXd::Zero(1);
  Stage s1;
  s1.nx = 1;
  s1.hessian = MatrixXd::Zero(1, 1);
  s1.gradient = VectorXd::Zero(1);
  s1.g.resize(0, 1);
  qp.stages = {s0, s1};
  qp.terminal_eq.resize(0, 1);
  qp.terminal_eq_rhs.resize(0);
  return qp;
}

Eigen::RowVectorXd row(std::initializer_list<double> v) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) r[i++] = e;
  return r;
}

}  // namespace

TEST_SUITE("qp_solver") {

TEST_CASE("clipped scalar optimum") {
  QpData qp = input_only(MatrixXd::Identity(1, 1), VectorXd::Constant(1, -1.0));
  qp.stages[0].add_row(row({0.0, -1.0}), -0.5, qp::RowKind::kInputBound);
  QpSolver solver;
  const qp::QpSolution sol = solver.solve(qp);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK(sol.u[0][0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(sol.row_dual[0][0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(-0.375).epsilon(1e-8));
}

TEST_CASE("unconstrained least norm") {
  const QpData qp = input_only(MatrixXd::Identity(3, 3), VectorXd::Zero(3));
  QpSolver solver;
  const qp::QpSolution sol = solver.solve(qp);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK(sol.u[0].norm() <= 1e-12);
  CHECK(sol.stats.iterations <= 2);
}

TEST_CASE("exact penalty keeps slacks at zero when the hard problem is feasible") {
  // min 1/2 u^2 - 2u  s.t. 1 - u >= 0 softened with weight c.
  for (double c : {0.5, 100.0}) {
    QpData qp = input_only(MatrixXd::Identity(1, 1), VectorXd::Constant(1, -2.0));
    qp.stages[0].add_row(row({0.0, -1.0}), -1.0, qp::RowKind::kGeneric, c);
    QpSolver solver;
    const qp::QpSolution sol = solver.solve(qp);
    REQUIRE(sol.status == QpStatus::kOptimal);
    if (c > 1.0) {
      // Weight above the multiplier of the hard constraint (= 1).
      CHECK(sol.slack[0][0] <= 1e-8);
      CHECK(sol.u[0][0] == doctest::Approx(1.0).epsilon(1e-8));
    } else {
      CHECK(sol.u[0][0] == doctest::Approx(1.5).epsilon(1e-8));
      CHECK(sol.slack[0][0] == doctest::Approx(0.5).epsilon(1e-8));
    }
  }
}

TEST_CASE("terminal equality and dynamics") {
  // Double integrator driven from rest to position 1 at stage 4.
  QpData qp;
  const int n = 4;
  qp.x0 = VectorXd::Zero(2);
  for (int i = 0; i <= n; ++i) {
    Stage s;
    s.nx = 2;
    s.nu = i < n ? 1 : 0;
    s.hessian = 1e-2 * MatrixXd::Identity(s.nw(), s.nw());
    s.gradient = VectorXd::Zero(s.nw());
    s.g.resize(0, s.nw());
    if (i < n) {
      s.a = (MatrixXd(2, 2) << 1, 1, 0, 1).finished();
      s.b = (MatrixXd(2, 1) << 0.5, 1).finished();
      s.c = VectorXd::Zero(2);
      s.add_row(row({0, 0, -1}), -1.0, qp::RowKind::kInputBound);
      s.add_row(row({0, 0, 1}), -1.0, qp::RowKind::kInputBound);
    }
    qp.stages.push_back(s);
  }
  qp.terminal_eq = (MatrixXd(2, 2) << 1, 0, 0, 1).finished();
  qp.terminal_eq_rhs = (VectorXd(2) << 1.0, 0.0).finished();
  QpSolver solver;
  const qp::QpSolution sol = solver.solve(qp);
  REQUIRE(sol.status == QpStatus::kOptimal);
  CHECK((sol.x[n] - qp.terminal_eq_rhs).norm() <= 1e-8);
  CHECK(testing::check_kkt(qp, sol).max() <= 1e-8);
}

TEST_CASE("random structured problems agree with active-set enumeration") {
  std::mt19937_64 rng(2024);
  int optimal = 0;
  double worst_obj = 0.0;
  double worst_kkt = 0.0;
  for (int t = 0; t < 200; ++t) {
    const QpData qp = testing::random_qp(rng);
    REQUIRE(testing::count_inequalities(qp) <= 12);
    const testing::DenseResult ref = testing::brute_force_qp(qp);
    REQUIRE(ref.feasible);
    QpSolver solver;
    const qp::QpSolution sol = solver.solve(qp);
    if (sol.status != QpStatus::kOptimal) continue;
    ++optimal;
    worst_obj = std::max(worst_obj, std::abs(sol.objective - ref.objective) /
                                        std::max(1.0, std::abs(ref.objective)));
    worst_kkt = std::max(worst_kkt, testing::check_kkt(qp, sol).max());
  }
  CHECK(optimal == 200);
  CHECK(worst_obj <= 1e-6);
  CHECK(worst_kkt <= 1e-8);
}

TEST_CASE("identical inputs give identical iterates") {
  std::mt19937_64 rng(99);
  const QpData qp = testing::random_qp(rng, {5, 3, 2, 12, 1.0});
  qp::SolverConfig cfg;
  cfg.trace = true;
  QpSolver a(cfg), b(cfg);
  const qp::QpSolution s1 = a.solve(qp);
  const qp::QpSolution s2 = b.solve(qp);
  const qp::QpSolution s3 = a.solve(qp);
  for (const qp::QpSolution* other : {&s2, &s3}) {
    REQUIRE(other->trace.size() == s1.trace.size());
    for (std::size_t k = 0; k < s1.trace.size(); ++k) {
      CHECK(other->trace[k].mu == s1.trace[k].mu);
      CHECK(other->trace[k].step == s1.trace[k].step);
      CHECK(other->trace[k].residuals.stationarity == s1.trace[k].residuals.stationarity);
    }
    for (std::size_t i = 0; i < s1.x.size(); ++i) CHECK(other->x[i] == s1.x[i]);
  }
}

TEST_CASE("trace csv") {
  std::mt19937_64 rng(4);
  const QpData qp = testing::random_qp(rng);
  qp::SolverConfig cfg;
  cfg.trace = true;
  QpSolver solver(cfg);
  const qp::QpSolution sol = solver.solve(qp);
  CHECK(static_cast<int>(sol.trace.size()) == sol.stats.iterations);
  std::ostringstream out;
  qp::write_trace_csv(sol.trace, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "iteration,stationarity,primal,dual,complementarity,mu,step_affine,step,centering");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == sol.stats.iterations);
}

TEST_CASE("long horizons with strongly active rows converge") {
  std::mt19937_64 rng(70);
  double worst = 0.0;
  int optimal = 0;
  for (int n : {70, 140}) {
    for (int t = 0; t < 15; ++t) {
      const QpData qp = testing::banded_qp(rng, n, 5, 2, 8);
      QpSolver solver;
      const qp::QpSolution sol = solver.solve(qp);
      if (sol.status == QpStatus::kOptimal) ++optimal;
      worst = std::max(worst, testing::check_kkt(qp, sol).max());
    }
  }
  CHECK(optimal == 30);
  CHECK(worst <= 1e-8);
}

TEST_CASE("conflicting hard rows are reported") {
  QpData qp = input_only(MatrixXd::Identity(1, 1), VectorXd::Zero(1));
  qp.stages[0].add_row(row({0.0, 1.0}), 1.0, qp::RowKind::kGeneric);
  qp.stages[0].add_row(row({0.0, -1.0}), 0.0, qp::RowKind::kGeneric);
  QpSolver solver;
  const qp::QpSolution sol = solver.solve(qp);
  CHECK(sol.status != QpStatus::kOptimal);
  CHECK(sol.status == QpStatus::kInfeasible);
}

TEST_CASE("malformed data is rejected") {
  QpData qp = input_only(MatrixXd::Identity(2, 2), VectorXd::Zero(2));
  qp.stages[0].hessian = MatrixXd::Identity(2, 2);
  QpSolver solver;
  CHECK_THROWS_AS(solver.solve(qp), DimensionError);
  Stage s;
  s.nx = 1;
  s.nu = 1;
  CHECK_THROWS_AS(s.add_row(row({1.0}), 0.0, qp::RowKind::kGeneric), DimensionError);
}

}  // TEST_SUITE
