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

#ifndef PROGSMOOTH_TESTS_SUPPORT_HPP_
#define PROGSMOOTH_TESTS_SUPPORT_HPP_

// Reference implementations used to check the library from the outside:
// finite differences, a dense brute-force QP solver and a KKT checker that
// only reads the problem data and the returned primal-dual point.

#include <Eigen/Core>

#include <functional>
#include <random>

#include "progsmooth/qp_solver.hpp"

namespace progsmooth::testing {

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Central differences with step h * max(1, |x_i|) per coordinate.
Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x,
                            double h = 1e-6);
Eigen::MatrixXd fd_jacobian(const VectorFn& f, const Eigen::VectorXd& x,
                            double h = 1e-6);

// ||a - ref||_inf / ||ref||_inf, or the absolute error when ref vanishes.
double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& ref);
// Largest rel_err over the columns.
double column_rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref);

struct RandomQpOptions {
  int max_horizon = 5;
  int max_nx = 3;
  int max_nu = 2;
  int max_inequalities = 12;  // rows plus slack bounds
  double terminal_eq_probability = 0.3;
};

// Feasible stage-structured QP with positive definite stage Hessians. Soft
// rows may be violated by the generating trajectory so that slacks activate.
qp::QpData random_qp(std::mt19937_64& rng, const RandomQpOptions& options = {});

// Feasible QP with fixed stage dimensions: every stage has nx states, nu
// inputs and rows_per_stage rows, alternating hard and soft.
qp::QpData banded_qp(std::mt19937_64& rng, int horizon, int nx, int nu,
                     int rows_per_stage);

// Number of one-sided inequalities including slack bounds.
int count_inequalities(const qp::QpData& qp);

struct DenseResult {
  bool feasible = false;
  double objective = 0.0;
  int candidates = 0;  // active sets with a nonsingular KKT system
};

// Eliminates the equalities through an orthonormal null-space basis and
// enumerates every active set of the remaining inequalities.
DenseResult brute_force_qp(const qp::QpData& qp);

// Infinity norms of the KKT conditions, recomputed from the data.
struct KktCheck {
  double stationarity = 0.0;
  double equality = 0.0;
  double inequality = 0.0;       // max violation of rows and sigma >= 0
  double dual = 0.0;             // max negative multiplier
  double complementarity = 0.0;  // max |multiplier * constraint value|

  double max() const;
};

KktCheck check_kkt(const qp::QpData& qp, const qp::QpSolution& sol);

}  // namespace progsmooth::testing

#endif  // PROGSMOOTH_TESTS_SUPPORT_HPP_
