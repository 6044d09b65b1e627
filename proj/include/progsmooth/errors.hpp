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

#ifndef PROGSMOOTH_ERRORS_HPP_
#define PROGSMOOTH_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace progsmooth {

// Argument outside the mathematical domain of an operation (alpha < 2 for the
// scaled norm, non-finite coordinates, widths outside (1, sqrt(2)], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative numerical routine could not produce a result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The Frenet model hit 1 - n * kappa == 0.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Query outside the arc-length domain of a reference path.
class OutOfRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Inconsistent sizes between trajectories, horizons and stage data.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace progsmooth

#endif  // PROGSMOOTH_ERRORS_HPP_
