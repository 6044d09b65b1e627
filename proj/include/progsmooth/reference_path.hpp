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

#ifndef PROGSMOOTH_REFERENCE_PATH_HPP_
#define PROGSMOOTH_REFERENCE_PATH_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace progsmooth::path {

// Curvature and its arc-length derivative at one point of the road.
struct CurvatureSample {
  double kappa = 0.0;
  double dkappa_ds = 0.0;
};

// Piecewise-linear curvature kappa(s). Beyond the last breakpoint the last
// value is held, so lookups past the end of the road stay defined.
struct CurvatureProfile {
  std::vector<double> breakpoints;   // strictly increasing, starts at 0
  std::vector<double> kappa_values;  // 1/m, one per breakpoint
  double length = 0.0;               // total arc length covered (m)

  static CurvatureProfile constant(double kappa, double length);

  CurvatureSample lookup(double s) const;
  double kappa_at(double s) const { return lookup(s).kappa; }
  // Throws DomainError on malformed profiles or |kappa| > kappa_max.
  void validate(double kappa_max = 1e9) const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Piecewise-linear road curvature with breakpoint magnitudes drawn uniformly
// from `curvature`, an independent random sign per breakpoint and segment
// lengths drawn uniformly from `segment_length`.
CurvatureProfile random_road(std::mt19937_64& rng, Interval curvature,
                             Interval segment_length, double total_length);

struct PathSample {
  double s = 0.0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double heading = 0.0;  // phi^gamma
  Eigen::Vector2d normal = Eigen::Vector2d::UnitY();  // left unit normal
};

struct CartesianPose {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double phi = 0.0;
};

struct FrenetPose {
  double s = 0.0;
  double n = 0.0;
  double beta = 0.0;
};

// Arc-length parameterized road centerline. Headings are integrated from the
// curvature profile with RK4; between samples the heading is interpolated
// linearly and the position follows the matching circular arc, which keeps
// the curve unit-speed and the normal orthogonal to the tangent everywhere.
class ReferencePath {
 public:
  static ReferencePath build(CurvatureProfile profile, double ds = 0.1,
                             double width = 10.0);

  double length() const { return length_; }
  double width() const { return width_; }
  double ds() const { return ds_; }
  const CurvatureProfile& profile() const { return profile_; }
  std::span<const PathSample> samples() const { return samples_; }

  Eigen::Vector2d position(double s) const;
  double heading(double s) const;
  Eigen::Vector2d tangent(double s) const;
  Eigen::Vector2d normal(double s) const;
  double curvature(double s) const { return profile_.kappa_at(s); }

  // Curvature of the interpolant on the sample interval containing s.
  double interval_curvature(double s) const;

 private:
  ReferencePath() = default;
  std::size_t interval_index(double s) const;

  CurvatureProfile profile_;
  std::vector<PathSample> samples_;
  double ds_ = 0.1;
  double length_ = 0.0;
  double width_ = 10.0;
};

// Closest-point projection followed by the Frenet transform. Throws
// OutOfRangeError when the projection leaves the path domain.
FrenetPose cartesian_to_frenet(const ReferencePath& path,
                               const CartesianPose& pose);

CartesianPose frenet_to_cartesian(const ReferencePath& path,
                                  const FrenetPose& pose);

}  // namespace progsmooth::path

#endif  // PROGSMOOTH_REFERENCE_PATH_HPP_
