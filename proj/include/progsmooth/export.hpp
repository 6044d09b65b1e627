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

#ifndef PROGSMOOTH_EXPORT_HPP_
#define PROGSMOOTH_EXPORT_HPP_

// Plot and log writers. CSV tables carry a leading "# schema=..." line.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "progsmooth/qp_solver.hpp"
#include "progsmooth/reference_path.hpp"
#include "progsmooth/shape_homotopy.hpp"
#include "progsmooth/sim_harness.hpp"

namespace progsmooth::io {

inline constexpr std::string_view kRunLogSchema = "progsmooth.runlog/1";
inline constexpr std::string_view kMetricsSchema = "progsmooth.metrics/1";
inline constexpr std::string_view kSummarySchema = "progsmooth.summary/1";

struct ContourGrid {
  double lo = -2.0;
  double hi = 2.0;
  int points = 201;  // per axis
};

// Columns xi1, xi2, value on a square grid; value is the homotopy o(xi).
void write_contour_csv(const shape::ShapeSpec& spec, const ContourGrid& grid,
                       std::ostream& out);

// Columns s, x, y, phi_gamma, kappa at the path samples.
void write_path_csv(const path::ReferencePath& path, std::ostream& out);

// Per-stage matrices for cross-checking against other solvers.
void write_qp_json(const qp::QpData& qp, std::ostream& out);

// One header record, one record per step, one metrics record.
void write_run_log(const sim::Scenario& scenario,
                   const sim::Formulation& formulation,
                   const sim::SimResult& result, const sim::Metrics& metrics,
                   std::ostream& out);

// One row per run: seed, formulation, completion, metric columns.
void write_metrics_csv(std::span<const sim::RunRecord> runs,
                       std::ostream& out);

// Per formulation and metric: count, min, q1, median, q3, max.
void write_summary_csv(const sim::ExperimentResult& result, std::ostream& out);

// Scenario parameters as a JSON object string.
std::string scenario_json(const sim::Scenario& scenario);

}  // namespace progsmooth::io

#endif  // PROGSMOOTH_EXPORT_HPP_
