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

#include "progsmooth/errors.hpp"
#include "progsmooth/vehicle_dynamics.hpp"
#include "test_support.hpp"

using namespace progsmooth;
using namespace progsmooth::vehicle;
using Eigen::VectorXd;

namespace {

// Reference values evaluated in 30-digit arithmetic.
constexpr double kSdotOracle = 10.5263157894736842;
constexpr double kLatAccelOracle = 3.45981627880863948;

const ModelParams kParams{};

KappaLookup constant_kappa(double k) {
  return [k](double) { return path::CurvatureSample{k, 0.0}; };
}

// Curvature varying linearly in s, so the s-dependence enters the Jacobians.
KappaLookup ramp_kappa() {
  return [](double s) { return path::CurvatureSample{0.02 + 0.001 * s, 0.001}; };
}

StateVec to_state(const VectorXd& z) { return z.head<kNx>(); }
InputVec to_input(const VectorXd& z) { return z.tail<kNu>(); }

}  // namespace

TEST_SUITE("vehicle_dynamics") {

TEST_CASE("ode right-hand side examples") {
  const double f_res = resistance(10.0, kParams);
  const StateVec dx = ode_rhs(StateVec(0, 0, 0, 10, 0), InputVec(f_res, 0), 0.0, kParams);
  CHECK(dx[kS] == doctest::Approx(10.0));
  CHECK(dx.tail<4>().norm() == doctest::Approx(0.0));

  const StateVec rest = ode_rhs(StateVec::Zero(), InputVec::Zero(), 0.0, kParams);
  CHECK(rest.norm() == 0.0);

  const StateVec curved = ode_rhs(StateVec(0, 1, 0, 10, 0), InputVec(f_res, 0), 0.05, kParams);
  CHECK(curved[kS] == doctest::Approx(kSdotOracle).epsilon(1e-15));

  CHECK_THROWS_AS(ode_rhs(StateVec(0, 20, 0, 10, 0), InputVec::Zero(), 0.05, kParams),
                  SingularityError);
}

TEST_CASE("resistance") {
  CHECK(resistance(0.0, kParams) == 0.0);
  CHECK(resistance(10.0, kParams) ==
        doctest::Approx(0.7 * 100.0 + 120.0 * std::tanh(100.0)));
  CHECK(resistance(-3.0, kParams) == doctest::Approx(0.7 * 9.0 - 120.0 * std::tanh(30.0)));
  for (double v : {-2.0, 0.0, 0.03, 5.0, 30.0}) {
    const double h = 1e-6;
    const double fd = (resistance(v + h, kParams) - resistance(v - h, kParams)) / (2 * h);
    CHECK(resistance_dv(v, kParams) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("parameter validation") {
  ModelParams bad = kParams;
  bad.mass = -1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = kParams;
  bad.wheelbase = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  CHECK_NOTHROW(kParams.validate());
}

TEST_CASE("ode jacobian matches finite differences") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    VectorXd z(kNx + kNu);
    z << 100 * u01(rng), 4 * u01(rng) - 2, 0.6 * u01(rng) - 0.3, 15 * u01(rng),
        0.6 * u01(rng) - 0.3, 6000 * u01(rng) - 3000, u01(rng) - 0.5;
    const auto kappa = ramp_kappa();
    const OdeJacobian jac = ode_jacobian(to_state(z), to_input(z), kappa(z[0]), kParams);
    Eigen::MatrixXd analytic(kNx, kNx + kNu);
    analytic << jac.dx, jac.du;
    const Eigen::MatrixXd fd = testing::fd_jacobian(
        [&](const VectorXd& w) -> VectorXd {
          return ode_rhs(to_state(w), to_input(w), kappa(w[0]).kappa, kParams);
        },
        z);
    worst = std::max(worst, testing::column_rel_err(analytic, fd));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("rk4 step examples") {
  const double f_res = resistance(10.0, kParams);
  const StateVec next = rk4_step(StateVec(3, 0, 0, 10, 0), InputVec(f_res, 0), 0.1,
                                 constant_kappa(0.0), kParams);
  CHECK(next[kS] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK((next.tail<4>() - StateVec(0, 0, 0, 10, 0).tail<4>()).norm() <= 1e-12);

  CHECK(rk4_step(StateVec::Zero(), InputVec::Zero(), 0.1, constant_kappa(0.0), kParams) ==
        StateVec::Zero());

  // Steady circular motion: delta matches the road curvature.
  const double kappa = 0.05;
  StateVec x(0, 0, 0, 10, std::atan(kParams.wheelbase * kappa));
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    x = rk4_step(x, InputVec(f_res, 0), 0.1, constant_kappa(kappa), kParams);
    worst = std::max({worst, std::abs(x[kN]), std::abs(x[kBeta])});
  }
  CHECK(worst <= 1e-6);
  CHECK(x[kS] == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("rk4 converges with fourth order") {
  const StateVec x0(0, 0.5, 0.1, 8, 0.1);
  const InputVec u(2500, 0.3);
  const auto kappa = ramp_kappa();
  constexpr double kT = 0.4;
  StateVec ref = x0;
  for (int k = 0; k < 4000; ++k) ref = rk4_step(ref, u, kT / 4000, kappa, kParams);
  const double e1 = (rk4_step(x0, u, kT, kappa, kParams) - ref).norm();
  StateVec half = rk4_step(x0, u, kT / 2, kappa, kParams);
  half = rk4_step(half, u, kT / 2, kappa, kParams);
  const double e2 = (half - ref).norm();
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("discrete jacobians match finite differences") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    VectorXd z(kNx + kNu);
    z << 100 * u01(rng), 4 * u01(rng) - 2, 0.6 * u01(rng) - 0.3, 15 * u01(rng),
        0.6 * u01(rng) - 0.3, 6000 * u01(rng) - 3000, u01(rng) - 0.5;
    const auto kappa = ramp_kappa();
    const DiscreteLinearization lin = discrete_jacobians(to_state(z), to_input(z), 0.1, kappa, kParams);
    CHECK((lin.next - rk4_step(to_state(z), to_input(z), 0.1, kappa, kParams)).norm() == 0.0);
    Eigen::MatrixXd analytic(kNx, kNx + kNu);
    analytic << lin.a, lin.b;
    const Eigen::MatrixXd fd = testing::fd_jacobian(
        [&](const VectorXd& w) -> VectorXd {
          return rk4_step(to_state(w), to_input(w), 0.1, kappa, kParams);
        },
        z);
    worst = std::max(worst, testing::column_rel_err(analytic, fd));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("discrete jacobian structure") {
  constexpr double kTd = 0.1;
  const DiscreteLinearization at_rest =
      discrete_jacobians(StateVec::Zero(), InputVec::Zero(), kTd, constant_kappa(0.0), kParams);
  // Near v = 0 the smoothed rolling resistance acts as linear damping.
  const double damping = kParams.c_roll / (kParams.sign_smoothing * kParams.mass);
  CHECK(at_rest.a(kS, kV) == doctest::Approx((1.0 - std::exp(-damping * kTd)) / damping).epsilon(1e-6));
  CHECK(at_rest.a(kS, kV) == doctest::Approx(kTd).epsilon(0.06));

  const DiscreteLinearization moving = discrete_jacobians(
      StateVec(0, 0.3, 0.05, 10, 0.02), InputVec(500, 0.1), kTd, ramp_kappa(), kParams);
  CHECK(moving.b(kDelta, kSteerRate) == doctest::Approx(kTd).epsilon(1e-14));
  CHECK(moving.b(kDelta, kForce) == 0.0);
  CHECK(moving.b(kV, kForce) == doctest::Approx(kTd / kParams.mass).epsilon(1e-2));
}

TEST_CASE("lateral acceleration") {
  CHECK(lateral_accel(StateVec(0, 0, 0, 10, 0.1), kParams) ==
        doctest::Approx(kLatAccelOracle).epsilon(1e-15));
  CHECK(lateral_accel(StateVec(0, 0, 0, 0, 0.1), kParams) == 0.0);
  CHECK(lateral_accel(StateVec(0, 0, 0, 10, 0), kParams) == 0.0);
  const StateVec x(1, 0.2, 0.1, 12, -0.05);
  const VectorXd fd = testing::fd_gradient(
      [&](const VectorXd& z) { return lateral_accel(to_state(z), kParams); }, x);
  CHECK(testing::rel_err(lateral_accel_grad(x, kParams), fd) <= 1e-6);
}

TEST_CASE("coasting never speeds up") {
  StateVec x(0, 0.2, 0.05, 12, 0.03);
  double previous = x[kV];
  bool monotone = true;
  for (int k = 0; k < 300; ++k) {
    x = rk4_step(x, InputVec::Zero(), 0.1, constant_kappa(0.01), kParams);
    monotone = monotone && x[kV] <= previous && x[kV] > 0.0;
    previous = x[kV];
  }
  CHECK(monotone);
}

TEST_CASE("lane keeping law") {
  const InputVec u = lane_keeping_input(StateVec(0, 0, 0, 10, 0), 0.0, 10.0, 0.0, kParams);
  CHECK(u[kForce] == doctest::Approx(resistance(10.0, kParams)));
  CHECK(u[kSteerRate] == 0.0);
  const InputVec clipped = lane_keeping_input(StateVec(0, -3, 0, 0, 0), 0.0, 40.0, 0.0, kParams);
  CHECK(clipped[kForce] == kParams.force_max);
  CHECK(clipped[kSteerRate] == doctest::Approx(kParams.steer_rate_max));

  // Closed loop: the law settles on the target lane of a curved road.
  StateVec x(0, 1.5, 0.1, 6, 0);
  const auto kappa = constant_kappa(0.03);
  for (int k = 0; k < 400; ++k) {
    x = rk4_step(x, lane_keeping_input(x, 0.0, 8.0, 0.03, kParams), 0.1, kappa, kParams);
  }
  CHECK(std::abs(x[kN]) < 0.05);
  CHECK(x[kV] == doctest::Approx(8.0).epsilon(1e-3));
}

}  // TEST_SUITE
