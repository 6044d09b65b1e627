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

#include "progsmooth/export.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>

namespace progsmooth::io {

using json = nlohmann::ordered_json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json scenario_object(const sim::Scenario& sc) {
  json svs = json::array();
  for (const sim::SvSpec& sv : sc.svs) {
    svs.push_back({{"s0", sv.s0},
                   {"n0", sv.n0},
                   {"v_set", sv.v_set},
                   {"length", sv.length},
                   {"width", sv.width}});
  }
  return {{"seed", sc.seed},
          {"experiment", sc.experiment},
          {"road_width", sc.road_width},
          {"road_breakpoints", sc.road.breakpoints},
          {"road_kappa", sc.road.kappa_values},
          {"road_length", sc.road.length},
          {"ego_s0", sc.ego_s0},
          {"v_ref", sc.v_ref},
          {"ego_length", sc.ego_length},
          {"ego_width", sc.ego_width},
          {"w_n", sc.w_n},
          {"svs", svs}};
}

void write_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << *v;
}

}  // namespace

void write_contour_csv(const shape::ShapeSpec& spec, const ContourGrid& grid,
                       std::ostream& out) {
  spec.validate();
  out.precision(10);
  out << "xi1,xi2,value\n";
  const double step =
      grid.points > 1 ? (grid.hi - grid.lo) / (grid.points - 1) : 0.0;
  Eigen::Vector2d xi;
  for (int i = 0; i < grid.points; ++i) {
    for (int j = 0; j < grid.points; ++j) {
      xi << grid.lo + i * step, grid.lo + j * step;
      out << xi[0] << ',' << xi[1] << ',' << shape::eval(spec, xi) << '\n';
    }
  }
}

void write_path_csv(const path::ReferencePath& path, std::ostream& out) {
  out.precision(12);
  out << "s,x,y,phi_gamma,kappa\n";
  for (const path::PathSample& p : path.samples()) {
    out << p.s << ',' << p.position.x() << ',' << p.position.y() << ','
        << p.heading << ',' << path.curvature(p.s) << '\n';
  }
}

void write_qp_json(const qp::QpData& qp, std::ostream& out) {
  json stages = json::array();
  for (const qp::Stage& st : qp.stages) {
    json kinds = json::array();
    for (qp::RowKind k : st.row_kind) kinds.push_back(qp::to_string(k));
    json s = {{"nx", st.nx},
              {"nu", st.nu},
              {"hessian", matrix_json(st.hessian)},
              {"gradient", vector_json(st.gradient)},
              {"g", matrix_json(st.g)},
              {"h", vector_json(st.h)},
              {"slack_of_row", st.slack_of_row},
              {"row_kind", kinds},
              {"slack_cost", vector_json(st.slack_cost)}};
    if (st.nu > 0) {
      s["a"] = matrix_json(st.a);
      s["b"] = matrix_json(st.b);
      s["c"] = vector_json(st.c);
    }
    stages.push_back(std::move(s));
  }
  const json doc = {{"x0", vector_json(qp.x0)},
                    {"terminal_eq", matrix_json(qp.terminal_eq)},
                    {"terminal_eq_rhs", vector_json(qp.terminal_eq_rhs)},
                    {"stages", stages}};
  out << doc.dump() << '\n';
}

void write_run_log(const sim::Scenario& scenario,
                   const sim::Formulation& formulation,
                   const sim::SimResult& result, const sim::Metrics& metrics,
                   std::ostream& out) {
  const json header = {{"schema", kRunLogSchema},
                       {"record", "header"},
                       {"formulation", formulation.name},
                       {"shape", shape::to_string(formulation.kind)},
                       {"alphas", result.alphas},
                       {"scenario", scenario_object(scenario)}};
  out << header.dump() << '\n';
  for (const sim::SimStep& st : result.steps) {
    json svs = json::array();
    for (const auto& z : st.svs) {
      svs.push_back(std::vector<double>(z.data(), z.data() + z.size()));
    }
    const auto& tel = st.telemetry;
    const json rec = {
        {"record", "step"},
        {"k", st.k},
        {"t", st.t},
        {"ego", std::vector<double>(st.ego.data(), st.ego.data() + 5)},
        {"ego_xy", {st.ego_cartesian.position.x(), st.ego_cartesian.position.y()}},
        {"ego_phi", st.ego_cartesian.phi},
        {"svs", svs},
        {"u", {st.u[0], st.u[1]}},
        {"qp_status", qp::to_string(tel.status)},
        {"qp_iterations", tel.qp_iterations},
        {"qp_time_s", tel.qp_time_s},
        {"step_time_s", tel.step_time_s},
        {"kkt_max", tel.residuals.max()},
        {"max_obstacle_slack", tel.max_obstacle_slack},
        {"max_state_slack", tel.max_state_slack}};
    out << rec.dump() << '\n';
  }
  const json tail = {{"record", "metrics"},
                     {"completed", result.completed},
                     {"error", result.error},
                     {"error_step", result.error_step},
                     {"delta_n_max", optional_json(metrics.delta_n_max)},
                     {"delta_n_min", optional_json(metrics.delta_n_min)},
                     {"delta_s", metrics.delta_s},
                     {"solve_ms_median", metrics.solve_ms_median},
                     {"solve_ms_max", metrics.solve_ms_max},
                     {"collision", metrics.collision},
                     {"window_steps", metrics.window_steps},
                     {"degraded_steps", metrics.degraded_steps}};
  out << tail.dump() << '\n';
}

void write_metrics_csv(std::span<const sim::RunRecord> runs,
                       std::ostream& out) {
  out.precision(10);
  out << "# schema=" << kMetricsSchema << '\n';
  out << "seed,formulation,completed,delta_n_max,delta_n_min,delta_s,"
         "collision,window_steps,degraded_steps,solve_ms_median,solve_ms_max\n";
  for (const sim::RunRecord& r : runs) {
    const sim::Metrics& m = r.metrics;
    out << r.seed << ',' << r.formulation << ',' << (r.completed ? 1 : 0)
        << ',';
    write_optional(out, m.delta_n_max);
    out << ',';
    write_optional(out, m.delta_n_min);
    out << ',' << m.delta_s << ',' << (m.collision ? 1 : 0) << ','
        << m.window_steps << ',' << m.degraded_steps << ','
        << m.solve_ms_median << ',' << m.solve_ms_max << '\n';
  }
}

void write_summary_csv(const sim::ExperimentResult& result,
                       std::ostream& out) {
  out.precision(10);
  out << "# schema=" << kSummarySchema << '\n';
  out << "experiment,formulation,completed,failed,collisions,metric,count,"
         "min,q1,median,q3,max\n";
  for (const sim::FormulationSummary& s : result.summaries) {
    const std::pair<const char*, const sim::Distribution*> rows[] = {
        {"delta_n_max", &s.delta_n_max},
        {"delta_n_min", &s.delta_n_min},
        {"delta_s", &s.delta_s},
        {"solve_ms_median", &s.solve_ms_median}};
    for (const auto& [name, d] : rows) {
      out << result.experiment << ',' << s.formulation << ',' << s.completed
          << ',' << s.failed << ',' << s.collisions << ',' << name << ','
          << d->count << ',';
      if (d->count > 0) {
        out << d->min << ',' << d->q1 << ',' << d->median << ',' << d->q3
            << ',' << d->max;
      } else {
        out << ",,,,";
      }
      out << '\n';
    }
  }
}

std::string scenario_json(const sim::Scenario& scenario) {
  return scenario_object(scenario).dump();
}

}  // namespace progsmooth::io
