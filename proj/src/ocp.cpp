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

#include "progsmooth/ocp.hpp"

#include <cmath>
#include <string>

#include "progsmooth/errors.hpp"

namespace progsmooth::ocp {

using qp::RowKind;
using vehicle::kBeta;
using vehicle::kDelta;
using vehicle::kN;
using vehicle::kNu;
using vehicle::kNx;
using vehicle::kS;
using vehicle::kV;

void ObstacleParams::validate() const {
  if (!(length > 0.0) || !(width > 0.0) || !std::isfinite(length) ||
      !std::isfinite(width)) {
    throw DomainError("obstacle length and width must be positive");
  }
}

void OcpConfig::set_lateral_weight(double w_n) {
  q[kN] = w_n;
  q_terminal[kN] = w_n;
}

void OcpConfig::validate() const {
  if (horizon < 1) throw DomainError("horizon must be at least 1");
  if (!(t_d > 0.0)) throw DomainError("t_d must be positive");
  if ((q.array() < 0.0).any() || (q_terminal.array() < 0.0).any() ||
      (r.array() < 0.0).any()) {
    throw DomainError("weights must be nonnegative");
  }
  if (!(slack_weight > 0.0) || !(state_slack_weight > 0.0)) {
    throw DomainError("slack weights must be positive");
  }
  if (!(force_scale > 0.0)) throw DomainError("force_scale must be positive");
  if (!(v_ref >= 0.0)) throw DomainError("v_ref must be nonnegative");
  if (!(lateral_limit() > 0.0)) throw DomainError("road narrower than ego");
  model.validate();
}

SvPrediction predict_sv(const SvState& sv, const ObstacleParams& theta, int n,
                        double t_d) {
  SvPrediction pred;
  pred.theta = theta;
  pred.states.assign(n + 1, sv);
  for (int i = 1; i <= n; ++i) {
    pred.states[i][kS] = pred.states[i - 1][kS] + sv[kV] * t_d;
  }
  return pred;
}

AlphaSchedule schedule_alpha(shape::ShapeKind kind, double d0, double dn,
                             int n) {
  if (n < 1) throw DomainError("horizon must be at least 1");
  if (!(d0 > 1.0) || !(d0 <= dn) || !(dn <= std::sqrt(2.0) + 1e-15)) {
    throw DomainError("width schedule needs 1 < d0 <= dN <= sqrt(2)");
  }
  AlphaSchedule out;
  out.kind = kind;
  out.alphas.resize(n + 1);
  out.widths.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    out.widths[i] = d0 + (static_cast<double>(i) / n) * (dn - d0);
    out.alphas[i] = shape::alpha_from_width(kind, out.widths[i]);
  }
  // Guard the ordering against bisection noise.
  for (int i = 1; i <= n; ++i) {
    out.alphas[i] = std::min(out.alphas[i], out.alphas[i - 1]);
  }
  return out;
}

AlphaSchedule constant_schedule(shape::ShapeKind kind, double alpha, int n) {
  if (n < 1) throw DomainError("horizon must be at least 1");
  shape::ShapeSpec{kind, alpha}.validate();
  AlphaSchedule out;
  out.kind = kind;
  out.alphas.assign(n + 1, alpha);
  return out;
}

Eigen::Vector2d normalize_to_obstacle(const Eigen::Vector2d& p,
                                      const SvState& z,
                                      const ObstacleParams& theta) {
  theta.validate();
  return {2.0 / theta.length * (p[0] - z[kS]),
          2.0 / theta.width * (p[1] - z[kN])};
}

namespace {

double pnorm_scale(double p) { return std::pow(2.0, -1.0 / p); }

constexpr double kCentreNudge = 1e-6;

}  // namespace

double obstacle_margin(const shape::ShapeSpec& spec,
                       const Eigen::Vector2d& xi) {
  if (spec.kind == shape::ShapeKind::kFixedPNorm) {
    spec.validate();
    return pnorm_scale(spec.alpha) * shape::eval_fixed_pnorm(xi, spec.alpha) -
           1.0;
  }
  return shape::constraint_value(spec, xi);
}

shape::HalfSpace obstacle_linearization(const shape::ShapeSpec& spec,
                                        const Eigen::Vector2d& xi) {
  if (spec.kind == shape::ShapeKind::kFixedPNorm) {
    const double k = pnorm_scale(spec.alpha);
    shape::HalfSpace hs;
    hs.normal = k * shape::grad(spec, xi);
    hs.offset = hs.normal.dot(xi) - obstacle_margin(spec, xi);
    return hs;
  }
  return shape::linearize(spec, xi);
}

StateVec reference_state(const OcpConfig& config, double s0, int stage) {
  StateVec x = StateVec::Zero();
  x[kS] = s0 + stage * config.t_d * config.v_ref;
  x[kV] = config.v_ref;
  return x;
}

qp::QpData build_qp(const Guess& guess, const StateVec& x_meas,
                    const OcpConfig& config, const AlphaSchedule& schedule,
                    std::span<const SvPrediction> svs,
                    const vehicle::KappaLookup& kappa) {
  const int n = config.horizon;
  if (static_cast<int>(guess.x.size()) != n + 1 ||
      static_cast<int>(guess.u.size()) != n) {
    throw DimensionError("guess must hold N+1 states and N inputs");
  }
  if (schedule.horizon() != n) {
    throw DimensionError("alpha schedule length != N+1");
  }
  for (const SvPrediction& sv : svs) {
    if (static_cast<int>(sv.states.size()) != n + 1) {
      throw DimensionError("SV prediction length != N+1");
    }
    sv.theta.validate();
  }
  const vehicle::ModelParams& mp = config.model;
  const Eigen::Vector2d scale(config.force_scale, 1.0);
  const double n_lim = config.lateral_limit();

  qp::QpData qp;
  qp.x0 = (x_meas - guess.x[0]);
  qp.stages.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    qp::Stage& st = qp.stages[i];
    st.nx = kNx;
    st.nu = i < n ? kNu : 0;
    const int nw = st.nw();
    const StateVec& xh = guess.x[i];
    const StateVec& q = i < n ? config.q : config.q_terminal;
    const StateVec xref = reference_state(config, x_meas[kS], i);

    st.hessian = Eigen::MatrixXd::Zero(nw, nw);
    st.gradient = Eigen::VectorXd::Zero(nw);
    st.hessian.diagonal().head(kNx) = 2.0 * q;
    st.gradient.head(kNx) = 2.0 * q.cwiseProduct(xh - xref);
    st.g.resize(0, nw);
    st.h.resize(0);
    st.slack_cost.resize(0);

    if (i < n) {
      const InputVec& uh = guess.u[i];
      st.hessian.diagonal().tail(kNu) =
          2.0 * config.r.cwiseProduct(scale).cwiseProduct(scale);
      st.gradient.tail(kNu) = 2.0 * config.r.cwiseProduct(scale).cwiseProduct(uh);

      const auto lin = vehicle::discrete_jacobians(xh, uh, config.t_d, kappa, mp);
      st.a = lin.a;
      st.b = lin.b * scale.asDiagonal();
      st.c = lin.next - guess.x[i + 1];

      const double bounds[kNu] = {mp.force_max, mp.steer_rate_max};
      for (int k = 0; k < kNu; ++k) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nw);
        row[kNx + k] = scale[k];
        st.add_row(row, -bounds[k] - uh[k], RowKind::kInputBound);
        st.add_row(-row, uh[k] - bounds[k], RowKind::kInputBound);
      }
    }

    // x_0 is fixed by the measurement, so state rows start at stage 1.
    if (i >= 1) {
      auto unit = [&](int idx) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nw);
        row[idx] = 1.0;
        return row;
      };
      const double ws = config.state_slack_weight;
      st.add_row(unit(kDelta), -mp.delta_max - xh[kDelta], RowKind::kStateBound);
      st.add_row(-unit(kDelta), xh[kDelta] - mp.delta_max, RowKind::kStateBound);
      st.add_row(unit(kN), -n_lim - xh[kN], RowKind::kStateBound, ws);
      st.add_row(-unit(kN), xh[kN] - n_lim, RowKind::kStateBound, ws);
      st.add_row(unit(kV), -xh[kV], RowKind::kStateBound, ws);
      if (i < n) {
        st.add_row(-unit(kV), xh[kV] - mp.v_max, RowKind::kStateBound, ws);
      }

      const double a_lat = vehicle::lateral_accel(xh, mp);
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nw);
      row.head(kNx) = vehicle::lateral_accel_grad(xh, mp).transpose();
      st.add_row(row, -mp.a_lat_max - a_lat, RowKind::kLateralAccel, ws);
      st.add_row(-row, a_lat - mp.a_lat_max, RowKind::kLateralAccel, ws);
    }

    const shape::ShapeSpec spec = schedule.at(i);
    for (const SvPrediction& sv : svs) {
      const Eigen::Vector2d p(xh[kS], xh[kN]);
      Eigen::Vector2d xi = normalize_to_obstacle(p, sv.states[i], sv.theta);
      if (!xi.allFinite()) {
        throw SingularityError("non-finite linearization point, stage " +
                               std::to_string(i));
      }
      // The norm gradients vanish or blow up at the centre; push the point
      // off it towards the left.
      if (xi.norm() < kCentreNudge) xi[1] = kCentreNudge;
      const shape::HalfSpace hs = obstacle_linearization(spec, xi);
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nw);
      row[kS] = hs.normal[0] * 2.0 / sv.theta.length;
      row[kN] = hs.normal[1] * 2.0 / sv.theta.width;
      st.add_row(row, hs.offset - hs.normal.dot(xi), RowKind::kObstacle,
                 config.slack_weight);
    }
  }

  qp.terminal_eq = Eigen::MatrixXd::Zero(1, kNx);
  qp.terminal_eq(0, kV) = 1.0;
  qp.terminal_eq_rhs = Eigen::VectorXd::Constant(1, -guess.x[n][kV]);
  return qp;
}

Guess apply_step(const Guess& guess, const qp::QpSolution& sol,
                 const OcpConfig& config) {
  const int n = guess.horizon();
  if (static_cast<int>(sol.x.size()) != n + 1 ||
      static_cast<int>(sol.u.size()) != n) {
    throw DimensionError("QP solution does not match the guess");
  }
  const Eigen::Vector2d scale(config.force_scale, 1.0);
  Guess out = guess;
  for (int i = 0; i <= n; ++i) out.x[i] += sol.x[i];
  for (int i = 0; i < n; ++i) out.u[i] += scale.cwiseProduct(sol.u[i]);
  return out;
}

}  // namespace progsmooth::ocp
