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

#ifndef PROGSMOOTH_SHAPE_HOMOTOPY_HPP_
#define PROGSMOOTH_SHAPE_HOMOTOPY_HPP_

// Smooth over-approximations of the normalized unit hypercube
// B = { xi : ||xi||_inf <= 1 } used as obstacle constraints.
//
// Every homotopy o(xi; alpha) is corner-normalized (o = 1 on every vertex of
// B) and describes the obstacle as the sublevel set o <= 1. Larger alpha
// gives a tighter shape. The benchmark formulations (fixed p-norm, ReLU^2)
// live here as well so the controller can dispatch over a single ShapeSpec.

#include <Eigen/Core>

#include <string>
#include <string_view>

namespace progsmooth::shape {

// Obstacle-relative coordinates after the affine normalization.
using NormalizedPoint = Eigen::VectorXd;
using PointRef = Eigen::Ref<const Eigen::VectorXd>;

enum class ShapeKind {
  kScaledNorm,
  kLogSumExp,
  kBoltzmann,
  kFixedPNorm,
  kRelu2,
};

std::string_view to_string(ShapeKind kind);
// Accepts "scalednorm", "lse"/"logsumexp", "boltzmann", "pnorm"/"fixedpnorm",
// "relu2" (case-insensitive). Throws DomainError otherwise.
ShapeKind parse_kind(std::string_view name);

// True for the three progressively smoothable homotopies.
bool is_homotopy(ShapeKind kind);

struct ShapeSpec {
  ShapeKind kind = ShapeKind::kScaledNorm;
  // Tightening parameter. For kFixedPNorm this is the norm order p; unused for
  // kRelu2.
  double alpha = 2.0;

  // Throws DomainError when alpha is outside the admissible range of `kind`.
  void validate() const;
};

// Linear inequality normal . xi >= offset.
struct HalfSpace {
  Eigen::VectorXd normal;
  double offset = 0.0;

  bool contains(const PointRef& xi, double tol = 0.0) const {
    return normal.dot(xi) >= offset - tol;
  }
  // Value of the linearized constraint function. For the homotopies this is
  // o_lin(xi) - 1, so o_lin(xi) = linear_margin(xi) + 1.
  double linear_margin(const PointRef& xi) const {
    return normal.dot(xi) - offset;
  }
};

double eval_scaled_norm(const PointRef& xi, double alpha);
double eval_log_sum_exp(const PointRef& xi, double alpha);
double eval_boltzmann(const PointRef& xi, double alpha);
double eval_relu2(const PointRef& xi);
// Plain p-norm ||xi||_p, p = alpha.
double eval_fixed_pnorm(const PointRef& xi, double alpha);

double eval(const ShapeSpec& shape, const PointRef& xi);

// Analytic gradient d o / d xi. Throws DomainError at xi = 0 for the norm
// kinds, where the gradient does not exist.
Eigen::VectorXd grad(const ShapeSpec& shape, const PointRef& xi);

// Signed obstacle margin c(xi): c >= 0 means "outside the obstacle".
// Homotopies and the p-norm use c = o - 1; ReLU^2 uses c = -penalty.
double constraint_value(const ShapeSpec& shape, const PointRef& xi);
Eigen::VectorXd constraint_grad(const ShapeSpec& shape, const PointRef& xi);

// First-order expansion of constraint_value at xi_lin, as a half-space. For
// the homotopies this is o(xi_lin) + grad o(xi_lin) . (xi - xi_lin) >= 1.
HalfSpace linearize(const ShapeSpec& shape, const PointRef& xi_lin);

// Tightening parameter whose boundary crosses the second axis at distance
// d_bar, i.e. the root of o([0, d_bar, 0, ...]; alpha) = 1. Uses the closed
// form ln(n) / ln(d_bar) for the scaled norm and bisection otherwise.
// d_bar must lie in (1, sqrt(2)].
double alpha_from_width(ShapeKind kind, double d_bar, int dim = 2);

// Bisection on the calibration equation for any homotopy kind, solved to
// |o - 1| <= 1e-10. Bracket [1e-3, 1e4] ([2, 1e4] for the scaled norm).
double solve_width_equation(ShapeKind kind, double d_bar, int dim = 2);

// Bracket bounds used by solve_width_equation.
inline constexpr double kAlphaBracketLow = 1e-3;
inline constexpr double kAlphaBracketHigh = 1e4;

}  // namespace progsmooth::shape

#endif  // PROGSMOOTH_SHAPE_HOMOTOPY_HPP_
