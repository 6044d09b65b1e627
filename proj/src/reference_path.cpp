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

#include "progsmooth/reference_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "progsmooth/errors.hpp"

namespace progsmooth::path {
namespace {

constexpr double kDomainSlack = 1e-9;

// sin(x) / x, accurate near zero.
double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// Displacement along an arc of length t starting with heading phi0 and
// constant curvature c.
Eigen::Vector2d arc_displacement(double phi0, double c, double t) {
  const double half = 0.5 * c * t;
  const double mid = phi0 + half;
  return t * sinc(half) * Eigen::Vector2d(std::cos(mid), std::sin(mid));
}

}  // namespace

CurvatureProfile CurvatureProfile::constant(double kappa, double length) {
  return CurvatureProfile{{0.0}, {kappa}, length};
}

CurvatureSample CurvatureProfile::lookup(double s) const {
  if (breakpoints.empty()) return {};
  if (s <= breakpoints.front()) return {kappa_values.front(), 0.0};
  if (s >= breakpoints.back()) return {kappa_values.back(), 0.0};
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  const double h = breakpoints[k + 1] - breakpoints[k];
  const double slope = (kappa_values[k + 1] - kappa_values[k]) / h;
  return {kappa_values[k] + slope * (s - breakpoints[k]), slope};
}

void CurvatureProfile::validate(double kappa_max) const {
  if (breakpoints.empty() || breakpoints.size() != kappa_values.size()) {
    throw DomainError("curvature profile needs one kappa per breakpoint");
  }
  if (breakpoints.front() != 0.0) {
    throw DomainError("curvature profile must start at s = 0");
  }
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    if (!(breakpoints[k] > breakpoints[k - 1])) {
      throw DomainError("curvature breakpoints must be strictly increasing");
    }
  }
  for (double kappa : kappa_values) {
    if (!std::isfinite(kappa) || std::abs(kappa) > kappa_max) {
      throw DomainError("curvature value out of range");
    }
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw DomainError("curvature profile length must be positive");
  }
}

CurvatureProfile random_road(std::mt19937_64& rng, Interval curvature,
                             Interval segment_length, double total_length) {
  if (curvature.lo < 0.0 || curvature.hi < curvature.lo ||
      !(segment_length.lo > 0.0) || segment_length.hi < segment_length.lo ||
      !(total_length > 0.0)) {
    throw DomainError("random_road: invalid ranges");
  }
  std::uniform_real_distribution<double> magnitude(curvature.lo, curvature.hi);
  std::uniform_real_distribution<double> segment(segment_length.lo,
                                                 segment_length.hi);
  std::bernoulli_distribution negative(0.5);

  CurvatureProfile profile;
  profile.length = total_length;
  double s = 0.0;
  while (true) {
    const double k = magnitude(rng);
    profile.breakpoints.push_back(s);
    profile.kappa_values.push_back(negative(rng) ? -k : k);
    if (s >= total_length) break;
    s += segment(rng);
  }
  return profile;
}

ReferencePath ReferencePath::build(CurvatureProfile profile, double ds,
                                   double width) {
  if (!(ds > 0.0)) throw DomainError("path sample spacing must be positive");
  profile.validate();
  ReferencePath path;
  path.width_ = width;
  path.length_ = profile.length;
  const auto intervals =
      static_cast<std::size_t>(std::ceil(profile.length / ds - 1e-9));
  path.ds_ = profile.length / static_cast<double>(std::max<std::size_t>(
                                  intervals, 1));
  const std::size_t count = std::max<std::size_t>(intervals, 1) + 1;
  const double h = path.ds_;

  path.samples_.resize(count);
  PathSample first;
  first.s = 0.0;
  path.samples_[0] = first;
  for (std::size_t k = 0; k + 1 < count; ++k) {
    const PathSample& cur = path.samples_[k];
    const double s0 = cur.s;
    // RK4 on dphi/ds = kappa(s); the right-hand side depends on s only.
    const double k1 = profile.kappa_at(s0);
    const double k2 = profile.kappa_at(s0 + 0.5 * h);
    const double k4 = profile.kappa_at(s0 + h);
    const double phi1 = cur.heading + h / 6.0 * (k1 + 4.0 * k2 + k4);

    PathSample next;
    next.s = (k + 1 == count - 1) ? profile.length : s0 + h;
    next.heading = phi1;
    next.position = cur.position +
                    arc_displacement(cur.heading, (phi1 - cur.heading) / h, h);
    next.normal = Eigen::Vector2d(-std::sin(phi1), std::cos(phi1));
    path.samples_[k + 1] = next;
  }
  path.profile_ = std::move(profile);
  return path;
}

std::size_t ReferencePath::interval_index(double s) const {
  if (s < -kDomainSlack || s > length_ + kDomainSlack || std::isnan(s)) {
    throw OutOfRangeError("path position s = " + std::to_string(s) +
                          " outside [0, " + std::to_string(length_) + "]");
  }
  const double idx = std::floor(std::clamp(s, 0.0, length_) / ds_);
  return std::min(static_cast<std::size_t>(std::max(idx, 0.0)),
                  samples_.size() - 2);
}

double ReferencePath::interval_curvature(double s) const {
  const std::size_t k = interval_index(s);
  return (samples_[k + 1].heading - samples_[k].heading) / ds_;
}

double ReferencePath::heading(double s) const {
  const std::size_t k = interval_index(s);
  const double t = std::clamp(s, 0.0, length_) - samples_[k].s;
  return samples_[k].heading +
         (samples_[k + 1].heading - samples_[k].heading) * t / ds_;
}

Eigen::Vector2d ReferencePath::position(double s) const {
  const std::size_t k = interval_index(s);
  const double t = std::clamp(s, 0.0, length_) - samples_[k].s;
  const double c = (samples_[k + 1].heading - samples_[k].heading) / ds_;
  return samples_[k].position + arc_displacement(samples_[k].heading, c, t);
}

Eigen::Vector2d ReferencePath::tangent(double s) const {
  const double phi = heading(s);
  return {std::cos(phi), std::sin(phi)};
}

Eigen::Vector2d ReferencePath::normal(double s) const {
  const double phi = heading(s);
  return {-std::sin(phi), std::cos(phi)};
}

FrenetPose cartesian_to_frenet(const ReferencePath& path,
                               const CartesianPose& pose) {
  const Eigen::Vector2d& p = pose.position;
  if (!p.allFinite() || !std::isfinite(pose.phi)) {
    throw DomainError("cartesian pose must be finite");
  }
  const auto samples = path.samples();

  // Coarse search; strict comparison keeps the smallest s on ties.
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double d2 = (samples[k].position - p).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = k;
    }
  }

  // g(sigma) = (gamma(sigma) - p) . t(sigma) is half the derivative of the
  // squared distance.
  auto g = [&](double sigma) {
    return (path.position(sigma) - p).dot(path.tangent(sigma));
  };
  constexpr double kTol = 1e-10;
  double lo = samples[best > 0 ? best - 1 : 0].s;
  double hi = samples[std::min(best + 1, samples.size() - 1)].s;
  double g_lo = g(lo);
  double g_hi = g(hi);
  if (g_lo > kTol) {
    if (best == 0) throw OutOfRangeError("projection before path start");
    lo = samples[best].s;
    g_lo = g(lo);
  }
  if (g_hi < -kTol) {
    if (best + 1 >= samples.size()) {
      throw OutOfRangeError("projection beyond path end");
    }
    hi = samples[best].s;
    g_hi = g(hi);
  }
  if (g_lo > kTol || g_hi < -kTol) {
    throw OutOfRangeError("closest-point projection not bracketed");
  }

  // Safeguarded Newton iteration on g.
  double sigma = samples[best].s;
  for (int iter = 0; iter < 100; ++iter) {
    const double value = g(sigma);
    if (std::abs(value) <= kTol) break;
    if (value < 0.0) {
      lo = sigma;
    } else {
      hi = sigma;
    }
    const Eigen::Vector2d offset = p - path.position(sigma);
    const double slope =
        1.0 - path.interval_curvature(sigma) * offset.dot(path.normal(sigma));
    double next = slope > 0.0 ? sigma - value / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15) break;
    sigma = next;
  }

  const Eigen::Vector2d offset = p - path.position(sigma);
  const double n = offset.dot(path.normal(sigma));
  const double kappa = path.interval_curvature(sigma);
  if (kappa != 0.0 && std::abs(n) >= 1.0 / std::abs(kappa)) {
    throw OutOfRangeError("pose outside the valid Frenet tube");
  }
  return FrenetPose{sigma, n, path.heading(sigma) - pose.phi};
}

CartesianPose frenet_to_cartesian(const ReferencePath& path,
                                  const FrenetPose& pose) {
  CartesianPose out;
  out.position = path.position(pose.s) + pose.n * path.normal(pose.s);
  out.phi = path.heading(pose.s) - pose.beta;
  return out;
}

}  // namespace progsmooth::path
