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

#include "progsmooth/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>

#include "progsmooth/errors.hpp"

namespace progsmooth::sim {

using vehicle::kBeta;
using vehicle::kDelta;
using vehicle::kN;
using vehicle::kS;
using vehicle::kV;

Scenario randomize(std::uint64_t seed, int experiment,
                   const RandomizeConfig& config) {
  if (experiment != 1 && experiment != 2) {
    throw DomainError("experiment id must be 1 or 2");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  Scenario sc;
  sc.seed = seed;
  sc.experiment = experiment;
  sc.road = path::random_road(rng, {0.01, 0.06}, config.segment_length,
                              config.road_length);
  sc.road_width = 10.0;
  SvSpec sv;
  sv.v_set = uniform(0.0, 5.0);
  sv.width = uniform(1.5, 4.0);
  sv.length = experiment == 1 ? uniform(4.0, 14.0) : uniform(2.0, 10.0);
  sv.s0 = uniform(50.0, 120.0);
  sc.svs.push_back(sv);
  sc.v_ref = uniform(7.0, 15.0);
  sc.ego_s0 = uniform(0.0, 10.0);
  sc.w_n = experiment == 1 ? 5.0 : 50.0;
  return sc;
}

Formulation Formulation::parse(const std::string& name) {
  Formulation f;
  f.name = name;
  if (name == "scalednorm") {
    f.kind = shape::ShapeKind::kScaledNorm;
  } else if (name == "lse") {
    f.kind = shape::ShapeKind::kLogSumExp;
  } else if (name == "boltzmann") {
    f.kind = shape::ShapeKind::kBoltzmann;
  } else if (name == "pnorm2" || name == "pnorm4" || name == "pnorm6") {
    f.kind = shape::ShapeKind::kFixedPNorm;
    f.scheduled = false;
    f.alpha = name.back() - '0';
  } else if (name == "relu2") {
    f.kind = shape::ShapeKind::kRelu2;
    f.scheduled = false;
    f.alpha = 0.0;
  } else {
    throw DomainError("unknown formulation '" + name + "'");
  }
  return f;
}

ocp::AlphaSchedule Formulation::schedule(int horizon) const {
  if (scheduled) return ocp::schedule_alpha(kind, d0, dn, horizon);
  return ocp::constant_schedule(kind, alpha, horizon);
}

std::vector<Formulation> parse_formulations(const std::string& comma_list) {
  std::vector<Formulation> out;
  std::stringstream ss(comma_list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(Formulation::parse(item));
  }
  if (out.empty()) throw DomainError("empty formulation list");
  return out;
}

StateVec sv_plant_step(const StateVec& z, const SvSpec& spec, double t_d,
                       const vehicle::KappaLookup& kappa,
                       const vehicle::ModelParams& params,
                       const vehicle::TrackingGains& gains) {
  const InputVec u = vehicle::lane_keeping_input(
      z, spec.n0, spec.v_set, kappa(z[kS]).kappa, params, gains);
  return vehicle::rk4_step(z, u, t_d, kappa, params);
}

SimResult run_closed_loop(const Scenario& scenario,
                          const Formulation& formulation,
                          const SimConfig& config) {
  rti::ControllerConfig cc = config.controller;
  ocp::OcpConfig& oc = cc.ocp;
  oc.v_ref = scenario.v_ref;
  oc.road_width = scenario.road_width;
  oc.ego_width = scenario.ego_width;
  oc.ego_length = scenario.ego_length;
  oc.set_lateral_weight(config.w_n.value_or(scenario.w_n));
  const vehicle::ModelParams& mp = oc.model;

  const auto kappa = vehicle::make_lookup(scenario.road);
  const auto ref =
      path::ReferencePath::build(scenario.road, config.path_ds,
                                 scenario.road_width);
  const ocp::AlphaSchedule schedule = formulation.schedule(oc.horizon);
  rti::Controller ctrl(cc, schedule, kappa);

  SimResult result;
  result.alphas = schedule.alphas;
  StateVec x(scenario.ego_s0, 0.0, 0.0, scenario.v_ref, 0.0);
  std::vector<StateVec> zs;
  for (const SvSpec& sv : scenario.svs) {
    zs.emplace_back(sv.s0, sv.n0, 0.0, sv.v_set, 0.0);
  }
  const int n_sim = static_cast<int>(std::lround(config.t_sim / oc.t_d));
  result.steps.reserve(n_sim);
  std::vector<rti::SurroundingVehicle> svs(scenario.svs.size());

  for (int k = 0; k < n_sim; ++k) {
    SimStep rec;
    rec.k = k;
    rec.t = k * oc.t_d;
    rec.ego = x;
    rec.svs = zs;
    try {
      rec.ego_cartesian =
          path::frenet_to_cartesian(ref, {x[kS], x[kN], x[kBeta]});
      for (std::size_t j = 0; j < zs.size(); ++j) {
        svs[j] = {zs[j], scenario.inflated(scenario.svs[j])};
      }
      if (k == 0) {
        ctrl.initialize(x);
        rec.u = ctrl.iterate(x, svs);
      } else {
        rec.u = ctrl.step(x, svs);
      }
      rec.telemetry = ctrl.telemetry();
      x = vehicle::rk4_step(x, rec.u, oc.t_d, kappa, mp);
      for (std::size_t j = 0; j < zs.size(); ++j) {
        zs[j] = sv_plant_step(zs[j], scenario.svs[j], oc.t_d, kappa, mp,
                              config.sv_gains);
      }
    } catch (const std::exception& e) {
      result.error = e.what();
      result.error_step = k;
      return result;
    }
    result.steps.push_back(std::move(rec));
  }
  result.completed = true;
  return result;
}

bool alongside(const SimStep& step, const Scenario& scenario, int sv) {
  const double half = 0.5 * scenario.inflated(scenario.svs.at(sv)).length;
  const double s_sv = step.svs.at(sv)[kS];
  return s_sv - half <= step.ego[kS] && step.ego[kS] <= s_sv + half;
}

Metrics compute_metrics(const SimResult& result, const Scenario& scenario,
                        double t_sim) {
  Metrics m;
  if (result.steps.empty()) return m;
  std::vector<double> times;
  times.reserve(result.steps.size());
  for (const SimStep& step : result.steps) {
    times.push_back(1e3 * step.telemetry.step_time_s);
    if (step.telemetry.degraded) ++m.degraded_steps;
    for (int j = 0; j < static_cast<int>(scenario.svs.size()); ++j) {
      if (!alongside(step, scenario, j)) continue;
      const double half_w = 0.5 * scenario.inflated(scenario.svs[j]).width;
      const double dn = std::abs(step.ego[kN] - step.svs[j][kN]) - half_w;
      m.delta_n_max = std::max(m.delta_n_max.value_or(dn), dn);
      m.delta_n_min = std::min(m.delta_n_min.value_or(dn), dn);
      ++m.window_steps;
    }
  }
  m.delta_s = result.steps.front().ego[kS] + scenario.v_ref * t_sim -
              result.steps.back().ego[kS];
  const Distribution d = summarize(times);
  m.solve_ms_median = d.median;
  m.solve_ms_max = d.max;
  m.collision = m.delta_n_min.has_value() && *m.delta_n_min < 0.0;
  return m;
}

Distribution summarize(std::vector<double> values) {
  Distribution d;
  d.count = static_cast<int>(values.size());
  if (values.empty()) return d;
  std::sort(values.begin(), values.end());
  auto quantile = [&values](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  d.min = values.front();
  d.q1 = quantile(0.25);
  d.median = quantile(0.5);
  d.q3 = quantile(0.75);
  d.max = values.back();
  return d;
}

const FormulationSummary& ExperimentResult::summary(
    const std::string& formulation) const {
  for (const auto& s : summaries) {
    if (s.formulation == formulation) return s;
  }
  throw OutOfRangeError("no summary for formulation '" + formulation + "'");
}

ExperimentResult run_experiment(int experiment, int n_scenarios,
                                const std::vector<Formulation>& formulations,
                                const SimConfig& config, std::uint64_t seed0,
                                const RandomizeConfig& road,
                                const RunCallback& on_run) {
  if (n_scenarios < 1) throw DomainError("n_scenarios must be at least 1");
  ExperimentResult out;
  out.experiment = experiment;
  for (int k = 0; k < n_scenarios; ++k) {
    const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(k);
    Scenario sc = randomize(seed, experiment, road);
    if (config.w_n) sc.w_n = *config.w_n;
    for (const Formulation& f : formulations) {
      const SimResult res = run_closed_loop(sc, f, config);
      RunRecord rec;
      rec.seed = seed;
      rec.formulation = f.name;
      rec.completed = res.completed;
      rec.error = res.error;
      rec.metrics = compute_metrics(res, sc, config.t_sim);
      if (on_run) on_run(sc, f, res, rec.metrics);
      out.runs.push_back(std::move(rec));
    }
  }
  for (const Formulation& f : formulations) {
    FormulationSummary s;
    s.formulation = f.name;
    std::vector<double> dn_max, dn_min, ds, t_med;
    for (const RunRecord& r : out.runs) {
      if (r.formulation != f.name) continue;
      if (!r.completed) {
        ++s.failed;
        continue;
      }
      ++s.completed;
      if (r.metrics.collision) ++s.collisions;
      if (r.metrics.delta_n_max) dn_max.push_back(*r.metrics.delta_n_max);
      if (r.metrics.delta_n_min) dn_min.push_back(*r.metrics.delta_n_min);
      ds.push_back(r.metrics.delta_s);
      t_med.push_back(r.metrics.solve_ms_median);
    }
    s.delta_n_max = summarize(dn_max);
    s.delta_n_min = summarize(dn_min);
    s.delta_s = summarize(ds);
    s.solve_ms_median = summarize(t_med);
    out.summaries.push_back(std::move(s));
  }
  return out;
}

}  // namespace progsmooth::sim
