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

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <vector>

#include "progsmooth/errors.hpp"
#include "progsmooth/ocp.hpp"
#include "test_support.hpp"

using namespace progsmooth;
using namespace progsmooth::ocp;
using shape::ShapeKind;
using vehicle::kN;
using vehicle::kS;
using vehicle::kV;

namespace {

// Reference value evaluated in 30-digit arithmetic.
constexpr double kAlphaWidth1005 = 138.975721610693783;

const vehicle::KappaLookup kStraight = vehicle::make_lookup(path::CurvatureProfile::constant(0.0, 2000.0));

OcpConfig small_config(int horizon = 20) {
  OcpConfig c;
  c.horizon = horizon;
  return c;
}

// Equilibrium rollout along the centreline at speed v.
Guess cruise(const OcpConfig& c, double s0, double v) {
  Guess g;
  const double f = vehicle::resistance(v, c.model);
  for (int i = 0; i <= c.horizon; ++i) g.x.push_back(StateVec(s0 + i * v * c.t_d, 0, 0, v, 0));
  g.u.assign(c.horizon, InputVec(f, 0));
  return g;
}

}  // namespace

TEST_SUITE("ocp") {

TEST_CASE("constant-velocity prediction") {
  const ObstacleParams theta{8.0, 4.0};
  const SvPrediction still = predict_sv(StateVec(30, 1, 0, 0, 0), theta, 10, 0.1);
  REQUIRE(still.states.size() == 11);
  for (const StateVec& z : still.states) CHECK(z == still.states.front());
  const SvPrediction moving = predict_sv(StateVec(30, 1, 0, 5, 0), theta, 70, 0.1);
  REQUIRE(moving.states.size() == 71);
  CHECK(moving.states.back()[kS] == doctest::Approx(65.0).epsilon(1e-12));
  CHECK(moving.states.back()[kN] == 1.0);
  CHECK(moving.theta.length == 8.0);
}

TEST_CASE("width schedule") {
  const AlphaSchedule sched = schedule_alpha(ShapeKind::kScaledNorm, 1.005, std::sqrt(2.0), 70);
  REQUIRE(sched.alphas.size() == 71);
  CHECK(sched.alphas.front() == doctest::Approx(kAlphaWidth1005).epsilon(1e-12));
  CHECK(sched.alphas.back() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sched.widths[35] == doctest::Approx(0.5 * (1.005 + std::sqrt(2.0))));
  for (ShapeKind k : {ShapeKind::kScaledNorm, ShapeKind::kLogSumExp, ShapeKind::kBoltzmann}) {
    const AlphaSchedule s = schedule_alpha(k, 1.005, std::sqrt(2.0), 70);
    for (int i = 0; i < 70; ++i) CHECK(s.alphas[i] >= s.alphas[i + 1]);
    CHECK(s.at(3).kind == k);
  }
  const AlphaSchedule flat = schedule_alpha(ShapeKind::kScaledNorm, 1.1, 1.1, 10);
  for (double a : flat.alphas) CHECK(a == flat.alphas.front());
  CHECK_THROWS_AS(schedule_alpha(ShapeKind::kScaledNorm, 1.0, 1.2, 10), DomainError);
  CHECK_THROWS_AS(schedule_alpha(ShapeKind::kScaledNorm, 1.3, 1.2, 10), DomainError);
  CHECK_THROWS_AS(schedule_alpha(ShapeKind::kScaledNorm, 1.1, 1.5, 10), DomainError);
  CHECK_THROWS_AS(constant_schedule(ShapeKind::kFixedPNorm, 3.0, 10), DomainError);
  CHECK(constant_schedule(ShapeKind::kFixedPNorm, 4.0, 10).alphas.size() == 11);
}

TEST_CASE("obstacle normalization") {
  const ObstacleParams theta{6.0, 2.0};
  const StateVec z(40, 1, 0, 3, 0);
  CHECK(normalize_to_obstacle({40.0, 1.0}, z, theta).norm() == 0.0);
  const Eigen::Vector2d corner = normalize_to_obstacle({43.0, 2.0}, z, theta);
  CHECK(corner.x() == doctest::Approx(1.0));
  CHECK(corner.y() == doctest::Approx(1.0));
  const Eigen::Vector2d e = normalize_to_obstacle({43.0, 0.0}, z, theta);
  CHECK(e.x() == doctest::Approx(1.0));
  CHECK(e.y() == doctest::Approx(-1.0));
  CHECK_THROWS_AS(normalize_to_obstacle({0.0, 0.0}, z, ObstacleParams{0.0, 1.0}), DomainError);
}

TEST_CASE("every stage shape covers the rectangle") {
  std::vector<shape::ShapeSpec> specs;
  for (ShapeKind k : {ShapeKind::kScaledNorm, ShapeKind::kLogSumExp, ShapeKind::kBoltzmann}) {
    const AlphaSchedule s = schedule_alpha(k, 1.005, std::sqrt(2.0), 70);
    for (int i = 0; i <= 70; i += 7) specs.push_back(s.at(i));
  }
  for (double p : {2.0, 4.0, 6.0}) specs.push_back({ShapeKind::kFixedPNorm, p});
  double worst = -1.0;
  for (const shape::ShapeSpec& spec : specs) {
    for (int i = 0; i <= 100; ++i)
      for (int j = 0; j <= 100; ++j)
        worst = std::max(worst, obstacle_margin(spec, {-1.0 + 0.02 * i, -1.0 + 0.02 * j}));
  }
  CHECK(worst <= 1e-9);
  for (double p : {2.0, 4.0, 6.0}) {
    CHECK(std::abs(obstacle_margin({ShapeKind::kFixedPNorm, p}, {1.0, 1.0})) <= 1e-12);
    const Eigen::Vector2d xi(1.3, -0.4);
    const shape::HalfSpace hs = obstacle_linearization({ShapeKind::kFixedPNorm, p}, xi);
    const Eigen::VectorXd fd = testing::fd_gradient(
        [&](const Eigen::VectorXd& x) {
          return obstacle_margin({ShapeKind::kFixedPNorm, p}, x.head<2>());
        },
        xi);
    CHECK(testing::rel_err(hs.normal, fd) <= 1e-6);
    CHECK(hs.linear_margin(xi) == doctest::Approx(obstacle_margin({ShapeKind::kFixedPNorm, p}, xi)));
  }
}

TEST_CASE("qp rows without surrounding vehicles") {
  const OcpConfig c = small_config(20);
  const Guess g = cruise(c, 0.0, 10.0);
  const AlphaSchedule sched = schedule_alpha(ShapeKind::kScaledNorm, 1.005, std::sqrt(2.0), 20);
  const qp::QpData qp = build_qp(g, g.x[0], c, sched, {}, kStraight);
  CHECK_NOTHROW(qp.validate());
  CHECK(qp.horizon() == 20);
  CHECK(qp.count_rows(qp::RowKind::kObstacle) == 0);
  CHECK(qp.count_rows(qp::RowKind::kInputBound) == 4 * 20);
  CHECK(qp.count_rows(qp::RowKind::kStateBound) == 6 * 19 + 5);
  CHECK(qp.count_rows(qp::RowKind::kLateralAccel) == 2 * 20);
  REQUIRE(qp.terminal_eq.rows() == 1);
  CHECK(qp.terminal_eq(0, kV) == 1.0);
  CHECK(qp.terminal_eq_rhs[0] == doctest::Approx(-10.0));
  CHECK(qp.x0.norm() == 0.0);
  double defect = 0.0;
  for (int i = 0; i < 20; ++i) defect = std::max(defect, qp.stages[i].c.norm());
  CHECK(defect <= 1e-12);
}

TEST_CASE("one obstacle row and slack per stage and vehicle") {
  const OcpConfig c = small_config(15);
  const Guess g = cruise(c, 0.0, 10.0);
  const AlphaSchedule sched = schedule_alpha(ShapeKind::kLogSumExp, 1.005, std::sqrt(2.0), 15);
  for (int m : {1, 2, 3}) {
    std::vector<SvPrediction> svs;
    for (int j = 0; j < m; ++j) {
      svs.push_back(predict_sv(StateVec(60 + 20 * j, 3, 0, 2, 0), {10.0, 4.0}, 15, 0.1));
    }
    const qp::QpData qp = build_qp(g, g.x[0], c, sched, svs, kStraight);
    CHECK(qp.count_rows(qp::RowKind::kObstacle) == 16 * m);
    int obstacle_slacks = 0;
    for (const qp::Stage& st : qp.stages) {
      for (int r = 0; r < st.rows(); ++r) {
        if (st.row_kind[r] == qp::RowKind::kObstacle) {
          CHECK(st.slack_of_row[r] >= 0);
          CHECK(st.slack_cost[st.slack_of_row[r]] == c.slack_weight);
          ++obstacle_slacks;
        }
      }
    }
    CHECK(obstacle_slacks == 16 * m);
  }
}

TEST_CASE("guess clear of the obstacle satisfies every obstacle row") {
  const OcpConfig c = small_config(30);
  const Guess g = cruise(c, 0.0, 10.0);
  const AlphaSchedule sched = schedule_alpha(ShapeKind::kScaledNorm, 1.005, std::sqrt(2.0), 30);
  const SvPrediction sv = predict_sv(StateVec(20, 3.5, 0, 4, 0), {10.0, 4.0}, 30, 0.1);
  const qp::QpData qp = build_qp(g, g.x[0], c, sched, std::span(&sv, 1), kStraight);
  for (int i = 0; i <= 30; ++i) {
    const qp::Stage& st = qp.stages[i];
    for (int r = 0; r < st.rows(); ++r) {
      if (st.row_kind[r] != qp::RowKind::kObstacle) continue;
      const Eigen::Vector2d xi = normalize_to_obstacle({g.x[i][kS], g.x[i][kN]}, sv.states[i], sv.theta);
      const double margin = obstacle_margin(sched.at(i), xi);
      CHECK(margin > 0.0);
      CHECK(-st.h[r] == doctest::Approx(margin).epsilon(1e-12));
    }
  }
}

TEST_CASE("gauss-newton hessians are positive semidefinite") {
  OcpConfig c = small_config(10);
  c.set_lateral_weight(50.0);
  CHECK(c.q[kN] == 50.0);
  CHECK(c.q_terminal[kN] == 50.0);
  const Guess g = cruise(c, 0.0, 8.0);
  const qp::QpData qp = build_qp(g, g.x[0], c, constant_schedule(ShapeKind::kFixedPNorm, 2.0, 10),
                                 {}, kStraight);
  for (const qp::Stage& st : qp.stages) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(st.hessian);
    CHECK(eig.eigenvalues().minCoeff() >= 0.0);
  }
}

TEST_CASE("scaled-norm rows are exact along the ray to the obstacle centre") {
  const OcpConfig c = small_config(40);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  Guess g = cruise(c, 0.0, 10.0);
  for (StateVec& x : g.x) x[kN] += jitter(rng);
  const AlphaSchedule sched = schedule_alpha(ShapeKind::kScaledNorm, 1.005, std::sqrt(2.0), 40);
  const SvPrediction sv = predict_sv(StateVec(25, 0.5, 0, 3, 0), {12.0, 4.5}, 40, 0.1);
  const qp::QpData qp = build_qp(g, g.x[0], c, sched, std::span(&sv, 1), kStraight);
  std::uniform_int_distribution<int> stage(1, 40);
  for (int t = 0; t < 3; ++t) {
    const int i = stage(rng);
    const qp::Stage& st = qp.stages[i];
    int r = 0;
    while (st.row_kind[r] != qp::RowKind::kObstacle) ++r;
    const Eigen::Vector2d p_hat(g.x[i][kS], g.x[i][kN]);
    const Eigen::Vector2d centre(sv.states[i][kS], sv.states[i][kN]);
    for (double gamma : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const Eigen::Vector2d p = centre + gamma * (p_hat - centre);
      Eigen::VectorXd dw = Eigen::VectorXd::Zero(st.nw());
      dw[kS] = p[0] - p_hat[0];
      dw[kN] = p[1] - p_hat[1];
      const double linear = st.g.row(r).dot(dw) - st.h[r];
      const double exact = obstacle_margin(sched.at(i), normalize_to_obstacle(p, sv.states[i], sv.theta));
      CHECK(std::abs(linear - exact) <= 1e-10);
    }
  }
}

TEST_CASE("slacks stay at zero when the obstacle can be avoided") {
  const OcpConfig c = small_config(30);
  const Guess g = cruise(c, 0.0, 10.0);
  const AlphaSchedule sched = schedule_alpha(ShapeKind::kScaledNorm, 1.005, std::sqrt(2.0), 30);
  const SvPrediction sv = predict_sv(StateVec(20, 2.6, 0, 0, 0), {10.0, 4.0}, 30, 0.1);
  const qp::QpData qp = build_qp(g, g.x[0], c, sched, std::span(&sv, 1), kStraight);
  qp::QpSolver solver;
  const qp::QpSolution sol = solver.solve(qp);
  REQUIRE(sol.status == qp::QpStatus::kOptimal);
  double worst = 0.0;
  for (const Eigen::VectorXd& s : sol.slack) {
    if (s.size() > 0) worst = std::max(worst, s.maxCoeff());
  }
  CHECK(worst <= 1e-8);
  CHECK(testing::check_kkt(qp, sol).max() <= 1e-8);
  const Guess next = apply_step(g, sol, c);
  CHECK(next.x.back()[kV] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(next.u[0][0] == doctest::Approx(g.u[0][0] + c.force_scale * sol.u[0][0]));
}

TEST_CASE("reference and validation") {
  const OcpConfig c = small_config(5);
  const StateVec r = reference_state(c, 12.0, 3);
  CHECK(r[kS] == doctest::Approx(12.0 + 3 * 0.1 * 10.0));
  CHECK(r[kV] == 10.0);
  CHECK(r[kN] == 0.0);
  CHECK(c.lateral_limit() == doctest::Approx(4.0));
  OcpConfig bad = c;
  bad.horizon = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = c;
  bad.slack_weight = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = c;
  bad.road_width = 1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);

  Guess g = cruise(c, 0.0, 10.0);
  const AlphaSchedule sched = constant_schedule(ShapeKind::kScaledNorm, 4.0, 5);
  Guess shortg = g;
  shortg.u.pop_back();
  CHECK_THROWS_AS(build_qp(shortg, g.x[0], c, sched, {}, kStraight), DimensionError);
  CHECK_THROWS_AS(build_qp(g, g.x[0], c, constant_schedule(ShapeKind::kScaledNorm, 4.0, 6), {}, kStraight),
                  DimensionError);
  const StateVec meas(0.5, 0.2, 0, 10, 0);
  CHECK((build_qp(g, meas, c, sched, {}, kStraight).x0 - (meas - g.x[0])).norm() == 0.0);
}

}  // TEST_SUITE
