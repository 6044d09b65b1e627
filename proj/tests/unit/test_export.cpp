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
#include <json.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "progsmooth/errors.hpp"
#include "progsmooth/export.hpp"
#include "test_support.hpp"

using namespace progsmooth;
using json = nlohmann::json;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_SUITE("export") {

TEST_CASE("contour grid") {
  std::ostringstream out;
  io::write_contour_csv(shape::ShapeSpec{shape::ShapeKind::kScaledNorm, 2.0},
                        {-1.0, 1.0, 3}, out);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 10);
  CHECK(lines[0] == "xi1,xi2,value");
  const auto corner = split(lines[1]);
  CHECK(std::stod(corner[0]) == -1.0);
  CHECK(std::stod(corner[2]) == doctest::Approx(1.0));
  const auto centre = split(lines[5]);
  CHECK(std::stod(centre[2]) == doctest::Approx(0.0));
  std::ostringstream bad;
  CHECK_THROWS_AS(io::write_contour_csv(shape::ShapeSpec{shape::ShapeKind::kScaledNorm, 0.5},
                                        {}, bad),
                  DomainError);
}

TEST_CASE("path samples") {
  const path::ReferencePath p = path::ReferencePath::build(path::CurvatureProfile::constant(0.0, 10.0), 1.0);
  std::ostringstream out;
  io::write_path_csv(p, out);
  const auto lines = lines_of(out.str());
  CHECK(lines[0] == "s,x,y,phi_gamma,kappa");
  REQUIRE(lines.size() == p.samples().size() + 1);
  const auto last = split(lines.back());
  CHECK(std::stod(last[0]) == doctest::Approx(10.0));
  CHECK(std::stod(last[1]) == doctest::Approx(10.0));
  CHECK(std::stod(last[2]) == doctest::Approx(0.0));
}

TEST_CASE("qp round trip through json") {
  std::mt19937_64 rng(5);
  const qp::QpData data = testing::random_qp(rng);
  std::ostringstream out;
  io::write_qp_json(data, out);
  const json doc = json::parse(out.str());
  REQUIRE(doc["stages"].size() == data.stages.size());
  CHECK(doc["x0"].size() == static_cast<std::size_t>(data.x0.size()));
  for (std::size_t i = 0; i < data.stages.size(); ++i) {
    const qp::Stage& st = data.stages[i];
    const json& js = doc["stages"][i];
    CHECK(js["nx"] == st.nx);
    CHECK(js["h"].size() == static_cast<std::size_t>(st.h.size()));
    for (Eigen::Index r = 0; r < st.hessian.rows(); ++r) {
      for (Eigen::Index c = 0; c < st.hessian.cols(); ++c) {
        CHECK(js["hessian"][r][c].get<double>() == st.hessian(r, c));
      }
    }
    CHECK(js.contains("a") == (st.nu > 0));
  }
}

TEST_CASE("run log and tables") {
  sim::Scenario sc;
  sc.road = path::CurvatureProfile::constant(0.0, 800.0);
  sc.v_ref = 10.0;
  sc.w_n = 50.0;
  sc.svs.push_back({40.0, 0.0, 0.0, 4.8, 2.0});
  sim::SimConfig cfg;
  cfg.t_sim = 1.0;
  cfg.controller.ocp.horizon = 20;
  const sim::Formulation form = sim::Formulation::parse("scalednorm");
  const sim::SimResult res = sim::run_closed_loop(sc, form, cfg);
  const sim::Metrics m = sim::compute_metrics(res, sc, cfg.t_sim);

  std::ostringstream log;
  io::write_run_log(sc, form, res, m, log);
  const auto lines = lines_of(log.str());
  REQUIRE(lines.size() == res.steps.size() + 2);
  const json header = json::parse(lines.front());
  CHECK(header["schema"] == std::string(io::kRunLogSchema));
  CHECK(header["scenario"]["w_n"] == 50.0);
  CHECK(header["alphas"].size() == 21);
  const json step = json::parse(lines[1]);
  CHECK(step["record"] == "step");
  CHECK(step["ego"].size() == 5);
  CHECK(step["svs"].size() == 1);
  const json tail = json::parse(lines.back());
  CHECK(tail["record"] == "metrics");
  CHECK(tail["delta_n_max"].is_null());
  CHECK(tail["completed"] == true);

  const json scen = json::parse(io::scenario_json(sc));
  CHECK(scen["svs"][0]["length"] == 4.8);

  const sim::ExperimentResult exp =
      sim::run_experiment(1, 1, {form}, cfg, 3);
  std::ostringstream metrics;
  io::write_metrics_csv(exp.runs, metrics);
  const auto mlines = lines_of(metrics.str());
  CHECK(mlines[0] == "# schema=" + std::string(io::kMetricsSchema));
  REQUIRE(mlines.size() == 3);
  CHECK(split(mlines[2]).size() == split(mlines[1]).size());
  CHECK(split(mlines[2])[1] == "scalednorm");

  std::ostringstream summary;
  io::write_summary_csv(exp, summary);
  const auto slines = lines_of(summary.str());
  CHECK(slines[0] == "# schema=" + std::string(io::kSummarySchema));
  REQUIRE(slines.size() == 6);
  for (std::size_t i = 2; i < slines.size(); ++i) {
    CHECK(split(slines[i]).size() == split(slines[1]).size());
  }
}

}  // TEST_SUITE
