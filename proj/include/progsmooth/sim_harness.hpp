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

#ifndef PROGSMOOTH_SIM_HARNESS_HPP_
#define PROGSMOOTH_SIM_HARNESS_HPP_

// Closed-loop simulation of the ego under RTI control and surrounding
// vehicles under a simple tracking law, on randomized roads.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "progsmooth/ocp.hpp"
#include "progsmooth/reference_path.hpp"
#include "progsmooth/rti_controller.hpp"

namespace progsmooth::sim {

using ocp::StateVec;
using vehicle::InputVec;

struct SvSpec {
  double s0 = 0.0;      // m
  double n0 = 0.0;      // m, lane offset it tracks
  double v_set = 0.0;   // m/s
  double length = 0.0;  // m, own footprint
  double width = 0.0;   // m
};

struct Scenario {
  std::uint64_t seed = 0;
  int experiment = 1;
  path::CurvatureProfile road;
  double road_width = 10.0;
  double ego_s0 = 0.0;
  double v_ref = 10.0;
  double ego_length = 4.8;
  double ego_width = 2.0;
  double w_n = 5.0;
  std::vector<SvSpec> svs;

  // Minkowski sum of the SV and ego footprints.
  ocp::ObstacleParams inflated(const SvSpec& sv) const {
    return {sv.length + ego_length, sv.width + ego_width};
  }
};

struct RandomizeConfig {
  double road_length = 800.0;              // m
  path::Interval segment_length{30.0, 60.0};  // m
};

// Uniform draws over the experiment's parameter box. Deterministic in seed.
// Throws DomainError for experiment ids other than 1 and 2.
Scenario randomize(std::uint64_t seed, int experiment,
                   const RandomizeConfig& config = {});

// Obstacle formulation: shape kind plus how alpha is chosen per stage.
struct Formulation {
  std::string name;
  shape::ShapeKind kind = shape::ShapeKind::kScaledNorm;
  bool scheduled = true;  // width schedule d0 -> dN; else constant alpha
  double alpha = 2.0;     // constant alpha / p-norm order
  double d0 = 1.005;
  double dn = 1.4142135623730951;

  // "scalednorm", "lse", "boltzmann", "pnorm2", "pnorm4", "pnorm6", "relu2".
  static Formulation parse(const std::string& name);
  ocp::AlphaSchedule schedule(int horizon) const;
};

std::vector<Formulation> parse_formulations(const std::string& comma_list);

struct SimConfig {
  double t_sim = 15.0;  // s
  rti::ControllerConfig controller;
  vehicle::TrackingGains sv_gains;
  double path_ds = 0.1;  // m, sampling of the Cartesian reference
  std::optional<double> w_n;  // replaces the scenario's lateral weight
};

struct SimStep {
  int k = 0;
  double t = 0.0;
  StateVec ego;
  path::CartesianPose ego_cartesian;
  std::vector<StateVec> svs;
  InputVec u = InputVec::Zero();
  rti::StepTelemetry telemetry;
};

struct SimResult {
  std::vector<SimStep> steps;  // t_sim / t_d records when completed
  bool completed = false;
  std::string error;  // diagnostic when the controller aborted the run
  int error_step = -1;
  std::vector<double> alphas;  // schedule used
};

// Plant step of an SV under the tracking law.
StateVec sv_plant_step(const StateVec& z, const SvSpec& spec, double t_d,
                       const vehicle::KappaLookup& kappa,
                       const vehicle::ModelParams& params,
                       const vehicle::TrackingGains& gains);

SimResult run_closed_loop(const Scenario& scenario,
                          const Formulation& formulation,
                          const SimConfig& config = {});

struct Metrics {
  std::optional<double> delta_n_max;  // absent when no step was alongside
  std::optional<double> delta_n_min;
  double delta_s = 0.0;
  double solve_ms_median = 0.0;
  double solve_ms_max = 0.0;
  bool collision = false;
  int window_steps = 0;
  int degraded_steps = 0;
};

// Lateral clearance |n - n_sv| - w/2 to the inflated rectangle (negative
// inside) over the steps where the ego is longitudinally alongside the SV.
Metrics compute_metrics(const SimResult& result, const Scenario& scenario,
                        double t_sim);

// True when the ego at step k is longitudinally within the inflated SV.
bool alongside(const SimStep& step, const Scenario& scenario, int sv);

struct Distribution {
  int count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Linear-interpolation quantiles; count = 0 for empty input.
Distribution summarize(std::vector<double> values);

struct RunRecord {
  std::uint64_t seed = 0;
  std::string formulation;
  bool completed = false;
  std::string error;
  Metrics metrics;
};

struct FormulationSummary {
  std::string formulation;
  int completed = 0;
  int failed = 0;
  int collisions = 0;
  Distribution delta_n_max;
  Distribution delta_n_min;
  Distribution delta_s;
  Distribution solve_ms_median;
};

struct ExperimentResult {
  int experiment = 1;
  std::vector<RunRecord> runs;  // ordered by seed, then formulation
  std::vector<FormulationSummary> summaries;

  const FormulationSummary& summary(const std::string& formulation) const;
};

using RunCallback = std::function<void(const Scenario&, const Formulation&,
                                       const SimResult&, const Metrics&)>;

// Runs every formulation on scenarios seed0, seed0 + 1, ... (paired design).
ExperimentResult run_experiment(int experiment, int n_scenarios,
                                const std::vector<Formulation>& formulations,
                                const SimConfig& config = {},
                                std::uint64_t seed0 = 1,
                                const RandomizeConfig& road = {},
                                const RunCallback& on_run = {});

}  // namespace progsmooth::sim

#endif  // PROGSMOOTH_SIM_HARNESS_HPP_
