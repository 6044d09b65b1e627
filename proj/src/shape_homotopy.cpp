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

#include "progsmooth/shape_homotopy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "progsmooth/errors.hpp"

namespace progsmooth::shape {
namespace {

void require_finite(const PointRef& xi) {
  if (xi.size() == 0) throw DomainError("normalized point must be non-empty");
  if (!xi.allFinite()) throw DomainError("normalized point must be finite");
}

void require_positive_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("alpha must be finite and > 0, got " +
                      std::to_string(alpha));
  }
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// log(cosh(a)) without overflow for large |a| and without cancellation for
// small |a|.
double log_cosh(double a) {
  a = std::abs(a);
  if (a < 1.0) {
    const double sh = std::sinh(0.5 * a);
    return std::log1p(2.0 * sh * sh);
  }
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

// log((1/n) sum_i cosh(alpha xi_i)), max-shifted.
double log_mean_cosh(const PointRef& xi, double alpha) {
  const double n = static_cast<double>(xi.size());
  const double m = alpha * xi.cwiseAbs().maxCoeff();
  if (m < 1.0) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
      const double sh = std::sinh(0.5 * alpha * xi[i]);
      acc += 2.0 * sh * sh;
    }
    return std::log1p(acc / n);
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    const double a = alpha * xi[i];
    acc += 0.5 * (std::exp(a - m) + std::exp(-a - m));
  }
  return m + std::log(acc / n);
}

double eta_lse(double alpha) { return 1.0 / log_cosh(alpha); }

double eta_bm(double alpha) { return 1.0 / std::tanh(alpha); }

// Shifted exponentials e^{+-alpha xi_i - m}, m = alpha max|xi_i|.
struct ShiftedExp {
  Eigen::VectorXd plus;
  Eigen::VectorXd minus;
};

ShiftedExp shifted_exp(const PointRef& xi, double alpha) {
  const double m = alpha * xi.cwiseAbs().maxCoeff();
  ShiftedExp e{Eigen::VectorXd(xi.size()), Eigen::VectorXd(xi.size())};
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    const double a = alpha * xi[i];
    e.plus[i] = std::exp(a - m);
    e.minus[i] = std::exp(-a - m);
  }
  return e;
}

Eigen::VectorXd grad_scaled_norm(const PointRef& xi, double alpha) {
  const double m = xi.cwiseAbs().maxCoeff();
  if (m == 0.0) throw DomainError("scaled norm gradient undefined at xi = 0");
  const double n = static_cast<double>(xi.size());
  const Eigen::ArrayXd r = xi.cwiseAbs().array() / m;
  const double s = r.pow(alpha).sum() / n;
  const double s_root = std::pow(s, 1.0 / alpha);
  Eigen::VectorXd g(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    g[i] = std::pow(r[i] / s_root, alpha - 1.0) * sign(xi[i]) / n;
  }
  return g;
}

Eigen::VectorXd grad_fixed_pnorm(const PointRef& xi, double p) {
  const double m = xi.cwiseAbs().maxCoeff();
  if (m == 0.0) throw DomainError("p-norm gradient undefined at xi = 0");
  const Eigen::ArrayXd r = xi.cwiseAbs().array() / m;
  const double norm_r = std::pow(r.pow(p).sum(), 1.0 / p);
  Eigen::VectorXd g(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    g[i] = std::pow(r[i] / norm_r, p - 1.0) * sign(xi[i]);
  }
  return g;
}

Eigen::VectorXd grad_log_sum_exp(const PointRef& xi, double alpha) {
  const ShiftedExp e = shifted_exp(xi, alpha);
  const double den = (e.plus + e.minus).sum();
  return (eta_lse(alpha) * alpha / den) * (e.plus - e.minus);
}

Eigen::VectorXd grad_boltzmann(const PointRef& xi, double alpha) {
  const ShiftedExp e = shifted_exp(xi, alpha);
  const Eigen::VectorXd sd = e.plus - e.minus;
  const Eigen::VectorXd sc = e.plus + e.minus;
  const double num = xi.dot(sd);
  const double den = sc.sum();
  const double ratio = num / den;
  Eigen::VectorXd g(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    const double dnum = sd[i] + alpha * xi[i] * sc[i];
    const double dden = alpha * sd[i];
    g[i] = eta_bm(alpha) * (dnum - ratio * dden) / den;
  }
  return g;
}

Eigen::VectorXd grad_relu2(const PointRef& xi) {
  const Eigen::Index n = xi.size();
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h[i] = std::max(0.0, 1.0 - std::abs(xi[i]));
  }
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double others = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) others *= h[j] * h[j];
    }
    g[i] = -2.0 * h[i] * sign(xi[i]) * others;
  }
  return g;
}

}  // namespace

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kScaledNorm:
      return "scalednorm";
    case ShapeKind::kLogSumExp:
      return "lse";
    case ShapeKind::kBoltzmann:
      return "boltzmann";
    case ShapeKind::kFixedPNorm:
      return "pnorm";
    case ShapeKind::kRelu2:
      return "relu2";
  }
  return "unknown";
}

ShapeKind parse_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "scalednorm") return ShapeKind::kScaledNorm;
  if (lower == "lse" || lower == "logsumexp") return ShapeKind::kLogSumExp;
  if (lower == "boltzmann" || lower == "bm") return ShapeKind::kBoltzmann;
  if (lower == "pnorm" || lower == "fixedpnorm") return ShapeKind::kFixedPNorm;
  if (lower == "relu2") return ShapeKind::kRelu2;
  throw DomainError("unknown shape kind '" + std::string(name) + "'");
}

bool is_homotopy(ShapeKind kind) {
  return kind == ShapeKind::kScaledNorm || kind == ShapeKind::kLogSumExp ||
         kind == ShapeKind::kBoltzmann;
}

void ShapeSpec::validate() const {
  switch (kind) {
    case ShapeKind::kScaledNorm:
      if (!(alpha >= 2.0) || std::isnan(alpha)) {
        throw DomainError("scaled norm requires alpha >= 2");
      }
      break;
    case ShapeKind::kLogSumExp:
    case ShapeKind::kBoltzmann:
      require_positive_alpha(alpha);
      break;
    case ShapeKind::kFixedPNorm:
      if (alpha != 2.0 && alpha != 4.0 && alpha != 6.0) {
        throw DomainError("fixed p-norm order must be 2, 4 or 6");
      }
      break;
    case ShapeKind::kRelu2:
      break;
  }
}

double eval_scaled_norm(const PointRef& xi, double alpha) {
  require_finite(xi);
  if (!(alpha >= 2.0)) throw DomainError("scaled norm requires alpha >= 2");
  const double m = xi.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  if (std::isinf(alpha)) return m;
  const double n = static_cast<double>(xi.size());
  const double s = (xi.cwiseAbs().array() / m).pow(alpha).sum() / n;
  return m * std::pow(s, 1.0 / alpha);
}

double eval_log_sum_exp(const PointRef& xi, double alpha) {
  require_finite(xi);
  require_positive_alpha(alpha);
  return eta_lse(alpha) * log_mean_cosh(xi, alpha);
}

double eval_boltzmann(const PointRef& xi, double alpha) {
  require_finite(xi);
  require_positive_alpha(alpha);
  const ShiftedExp e = shifted_exp(xi, alpha);
  const double num = xi.dot(e.plus - e.minus);
  const double den = (e.plus + e.minus).sum();
  return eta_bm(alpha) * num / den;
}

double eval_relu2(const PointRef& xi) {
  require_finite(xi);
  double p = 1.0;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    const double h = std::max(0.0, 1.0 - std::abs(xi[i]));
    p *= h * h;
  }
  return p;
}

double eval_fixed_pnorm(const PointRef& xi, double alpha) {
  require_finite(xi);
  if (!(alpha >= 1.0)) throw DomainError("p-norm requires p >= 1");
  const double m = xi.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  return m * std::pow((xi.cwiseAbs().array() / m).pow(alpha).sum(),
                      1.0 / alpha);
}

double eval(const ShapeSpec& shape, const PointRef& xi) {
  shape.validate();
  switch (shape.kind) {
    case ShapeKind::kScaledNorm:
      return eval_scaled_norm(xi, shape.alpha);
    case ShapeKind::kLogSumExp:
      return eval_log_sum_exp(xi, shape.alpha);
    case ShapeKind::kBoltzmann:
      return eval_boltzmann(xi, shape.alpha);
    case ShapeKind::kFixedPNorm:
      return eval_fixed_pnorm(xi, shape.alpha);
    case ShapeKind::kRelu2:
      return eval_relu2(xi);
  }
  throw DomainError("unhandled shape kind");
}

Eigen::VectorXd grad(const ShapeSpec& shape, const PointRef& xi) {
  shape.validate();
  require_finite(xi);
  switch (shape.kind) {
    case ShapeKind::kScaledNorm:
      return grad_scaled_norm(xi, shape.alpha);
    case ShapeKind::kLogSumExp:
      return grad_log_sum_exp(xi, shape.alpha);
    case ShapeKind::kBoltzmann:
      return grad_boltzmann(xi, shape.alpha);
    case ShapeKind::kFixedPNorm:
      return grad_fixed_pnorm(xi, shape.alpha);
    case ShapeKind::kRelu2:
      return grad_relu2(xi);
  }
  throw DomainError("unhandled shape kind");
}

double constraint_value(const ShapeSpec& shape, const PointRef& xi) {
  if (shape.kind == ShapeKind::kRelu2) return -eval_relu2(xi);
  return eval(shape, xi) - 1.0;
}

Eigen::VectorXd constraint_grad(const ShapeSpec& shape, const PointRef& xi) {
  if (shape.kind == ShapeKind::kRelu2) return -grad(shape, xi);
  return grad(shape, xi);
}

HalfSpace linearize(const ShapeSpec& shape, const PointRef& xi_lin) {
  HalfSpace h;
  h.normal = constraint_grad(shape, xi_lin);
  h.offset = h.normal.dot(xi_lin) - constraint_value(shape, xi_lin);
  return h;
}

double solve_width_equation(ShapeKind kind, double d_bar, int dim) {
  if (!is_homotopy(kind)) {
    throw DomainError("width calibration is defined for the homotopies only");
  }
  if (dim < 2) throw DomainError("width calibration needs dim >= 2");
  if (!(d_bar > 1.0) || !(d_bar <= std::sqrt(2.0) + 1e-15)) {
    throw DomainError("d_bar must lie in (1, sqrt(2)], got " +
                      std::to_string(d_bar));
  }
  Eigen::VectorXd point = Eigen::VectorXd::Zero(dim);
  point[1] = d_bar;
  auto residual = [&](double alpha) {
    return eval(ShapeSpec{kind, alpha}, point) - 1.0;
  };

  constexpr double kTol = 1e-10;
  double lo = kind == ShapeKind::kScaledNorm ? 2.0 : kAlphaBracketLow;
  double hi = kAlphaBracketHigh;
  const double f_lo = residual(lo);
  if (std::abs(f_lo) <= kTol) return lo;
  if (f_lo > 0.0) {
    // LogSumExp and Boltzmann reach the 2-ball only in the limit alpha -> 0;
    // the lower bracket end stands in for that limit.
    if (kind != ShapeKind::kScaledNorm && d_bar >= std::sqrt(2.0) - 1e-9) {
      return lo;
    }
    throw NumericError("width equation: no sign change at lower bracket");
  }
  if (residual(hi) < 0.0) {
    throw NumericError("width equation: no sign change at upper bracket");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f = residual(mid);
    if (std::abs(f) <= kTol && hi - lo <= 1e-12 * mid) return mid;
    if (f < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  const double mid = 0.5 * (lo + hi);
  if (std::abs(residual(mid)) > kTol) {
    throw NumericError("width equation: bisection did not reach tolerance");
  }
  return mid;
}

double alpha_from_width(ShapeKind kind, double d_bar, int dim) {
  if (kind == ShapeKind::kScaledNorm) {
    if (!(d_bar > 1.0) || !(d_bar <= std::sqrt(2.0) + 1e-15)) {
      throw DomainError("d_bar must lie in (1, sqrt(2)], got " +
                        std::to_string(d_bar));
    }
    if (dim < 2) throw DomainError("width calibration needs dim >= 2");
    const double alpha = std::log(static_cast<double>(dim)) / std::log(d_bar);
    return std::max(alpha, 2.0);
  }
  return solve_width_equation(kind, d_bar, dim);
}

}  // namespace progsmooth::shape
