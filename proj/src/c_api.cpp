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

#include "progsmooth/progsmooth.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "progsmooth/errors.hpp"
#include "progsmooth/export.hpp"
#include "progsmooth/rti_controller.hpp"
#include "progsmooth/sim_harness.hpp"

using namespace progsmooth;

struct ps_path {
  path::ReferencePath path;
};

struct ps_scenario {
  sim::Scenario scenario;
};

struct ps_run {
  sim::Scenario scenario;
  sim::Formulation formulation;
  sim::SimResult result;
  sim::Metrics metrics;
  double t_sim = 0.0;
};

struct ps_experiment {
  sim::ExperimentResult result;
};

struct ps_controller {
  rti::Controller controller;
  rti::StepTelemetry last;
  bool started = false;
};

namespace {

thread_local std::string g_last_error;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ps_status fail(ps_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Maps the library exceptions onto status codes.
template <typename F>
ps_status guarded(F&& body) {
  try {
    body();
    return PS_OK;
  } catch (const IoError& e) {
    return fail(PS_ERR_IO, e.what());
  } catch (const DimensionError& e) {
    return fail(PS_ERR_DIMENSION, e.what());
  } catch (const DomainError& e) {
    return fail(PS_ERR_DOMAIN, e.what());
  } catch (const OutOfRangeError& e) {
    return fail(PS_ERR_OUT_OF_RANGE, e.what());
  } catch (const SingularityError& e) {
    return fail(PS_ERR_SINGULAR, e.what());
  } catch (const NumericError& e) {
    return fail(PS_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PS_ERR_INTERNAL, "unknown exception");
  }
}

#define PS_REQUIRE(cond, what)                              \
  do {                                                      \
    if (!(cond)) return fail(PS_ERR_INVALID_ARGUMENT, what); \
  } while (0)

std::ofstream open_out(const char* file) {
  std::ofstream out(file);
  if (!out) throw IoError(std::string("cannot open '") + file + "' for writing");
  return out;
}

void close_out(std::ofstream& out, const char* file) {
  out.flush();
  if (!out) throw IoError(std::string("write to '") + file + "' failed");
}

sim::SimConfig to_sim_config(const ps_sim_config* c) {
  ps_sim_config defaults;
  ps_sim_config_default(&defaults);
  if (c == nullptr) c = &defaults;
  sim::SimConfig out;
  out.t_sim = c->t_sim;
  out.controller.ocp.horizon = c->horizon;
  out.controller.ocp.t_d = c->t_d;
  out.controller.ocp.slack_weight = c->slack_weight;
  out.controller.solver.kkt_tol = c->kkt_tol;
  out.controller.solver.max_iter = c->max_iter;
  if (c->w_n >= 0.0) out.w_n = c->w_n;
  if (!(c->t_sim > 0.0)) throw DomainError("t_sim must be positive");
  if (!(c->kkt_tol > 0.0)) throw DomainError("kkt_tol must be positive");
  if (c->max_iter < 1) throw DomainError("max_iter must be at least 1");
  out.controller.ocp.validate();
  return out;
}

sim::Formulation to_formulation(const char* name, const ps_sim_config* c) {
  sim::Formulation f = sim::Formulation::parse(name);
  if (c != nullptr && f.scheduled) {
    f.d0 = c->d0;
    f.dn = c->dn;
  }
  return f;
}

void fill_metrics(const sim::Metrics& m, bool completed, int steps,
                  ps_metrics* out) {
  *out = {};
  out->completed = completed ? 1 : 0;
  out->has_delta_n = m.delta_n_max.has_value() ? 1 : 0;
  out->delta_n_max = m.delta_n_max.value_or(0.0);
  out->delta_n_min = m.delta_n_min.value_or(0.0);
  out->delta_s = m.delta_s;
  out->solve_ms_median = m.solve_ms_median;
  out->solve_ms_max = m.solve_ms_max;
  out->collision = m.collision ? 1 : 0;
  out->window_steps = m.window_steps;
  out->degraded_steps = m.degraded_steps;
  out->steps = steps;
}

}  // namespace

extern "C" {

const char* ps_version(void) { return "0.1.0"; }

const char* ps_last_error(void) { return g_last_error.c_str(); }

const char* ps_status_name(ps_status status) {
  switch (status) {
    case PS_OK:
      return "ok";
    case PS_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case PS_ERR_DOMAIN:
      return "domain";
    case PS_ERR_NUMERIC:
      return "numeric";
    case PS_ERR_SINGULAR:
      return "singular";
    case PS_ERR_OUT_OF_RANGE:
      return "out_of_range";
    case PS_ERR_DIMENSION:
      return "dimension";
    case PS_ERR_IO:
      return "io";
    case PS_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

ps_status ps_shape_eval(const char* kind, double alpha, const double* xi,
                        int dim, double* value) {
  PS_REQUIRE(kind && xi && value && dim > 0, "null argument or dim < 1");
  return guarded([&] {
    const shape::ShapeSpec spec{shape::parse_kind(kind), alpha};
    *value = shape::eval(spec, Eigen::Map<const Eigen::VectorXd>(xi, dim));
  });
}

ps_status ps_shape_grad(const char* kind, double alpha, const double* xi,
                        int dim, double* grad) {
  PS_REQUIRE(kind && xi && grad && dim > 0, "null argument or dim < 1");
  return guarded([&] {
    const shape::ShapeSpec spec{shape::parse_kind(kind), alpha};
    const Eigen::VectorXd g =
        shape::grad(spec, Eigen::Map<const Eigen::VectorXd>(xi, dim));
    std::copy(g.data(), g.data() + dim, grad);
  });
}

ps_status ps_alpha_from_width(const char* kind, double d_bar, int dim,
                              double* alpha) {
  PS_REQUIRE(kind && alpha, "null argument");
  return guarded(
      [&] { *alpha = shape::alpha_from_width(shape::parse_kind(kind), d_bar, dim); });
}

ps_status ps_shape_write_contour_csv(const char* kind, double alpha, double lo,
                                     double hi, int points, const char* file) {
  PS_REQUIRE(kind && file, "null argument");
  PS_REQUIRE(points >= 2 && hi > lo, "need points >= 2 and hi > lo");
  return guarded([&] {
    const shape::ShapeSpec spec{shape::parse_kind(kind), alpha};
    spec.validate();
    std::ofstream out = open_out(file);
    io::write_contour_csv(spec, {lo, hi, points}, out);
    close_out(out, file);
  });
}

ps_status ps_path_create(const double* breakpoints, const double* kappa,
                         int count, double length, double ds, double width,
                         ps_path** out) {
  PS_REQUIRE(breakpoints && kappa && out && count >= 1, "null argument");
  *out = nullptr;
  return guarded([&] {
    path::CurvatureProfile prof;
    prof.breakpoints.assign(breakpoints, breakpoints + count);
    prof.kappa_values.assign(kappa, kappa + count);
    prof.length = length;
    *out = new ps_path{path::ReferencePath::build(std::move(prof), ds, width)};
  });
}

void ps_path_destroy(ps_path* path) { delete path; }

ps_status ps_path_length(const ps_path* path, double* length) {
  PS_REQUIRE(path && length, "null argument");
  *length = path->path.length();
  return PS_OK;
}

ps_status ps_path_to_frenet(const ps_path* path, double x, double y,
                            double phi, double* s, double* n, double* beta) {
  PS_REQUIRE(path && s && n && beta, "null argument");
  return guarded([&] {
    const auto f = path::cartesian_to_frenet(path->path, {{x, y}, phi});
    *s = f.s;
    *n = f.n;
    *beta = f.beta;
  });
}

ps_status ps_path_to_cartesian(const ps_path* path, double s, double n,
                               double beta, double* x, double* y,
                               double* phi) {
  PS_REQUIRE(path && x && y && phi, "null argument");
  return guarded([&] {
    const auto c = path::frenet_to_cartesian(path->path, {s, n, beta});
    *x = c.position.x();
    *y = c.position.y();
    *phi = c.phi;
  });
}

ps_status ps_path_write_csv(const ps_path* path, const char* file) {
  PS_REQUIRE(path && file, "null argument");
  return guarded([&] {
    std::ofstream out = open_out(file);
    io::write_path_csv(path->path, out);
    close_out(out, file);
  });
}

ps_status ps_scenario_randomize(uint64_t seed, int experiment,
                                ps_scenario** out) {
  PS_REQUIRE(out, "null argument");
  *out = nullptr;
  return guarded(
      [&] { *out = new ps_scenario{sim::randomize(seed, experiment)}; });
}

void ps_scenario_destroy(ps_scenario* scenario) { delete scenario; }

ps_status ps_scenario_path(const ps_scenario* scenario, double ds,
                           ps_path** out) {
  PS_REQUIRE(scenario && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new ps_path{path::ReferencePath::build(
        scenario->scenario.road, ds, scenario->scenario.road_width)};
  });
}

ps_status ps_scenario_json(const ps_scenario* scenario, char* buf, size_t cap,
                           size_t* needed) {
  PS_REQUIRE(scenario, "null argument");
  return guarded([&] {
    const std::string s = io::scenario_json(scenario->scenario);
    if (needed) *needed = s.size();
    if (buf && cap > 0) {
      const size_t n = std::min(cap - 1, s.size());
      std::memcpy(buf, s.data(), n);
      buf[n] = '\0';
    }
  });
}

void ps_sim_config_default(ps_sim_config* config) {
  if (config == nullptr) return;
  const sim::SimConfig sc;
  const sim::Formulation f;
  config->horizon = sc.controller.ocp.horizon;
  config->t_d = sc.controller.ocp.t_d;
  config->t_sim = sc.t_sim;
  config->slack_weight = sc.controller.ocp.slack_weight;
  config->kkt_tol = sc.controller.solver.kkt_tol;
  config->max_iter = sc.controller.solver.max_iter;
  config->d0 = f.d0;
  config->dn = f.dn;
  config->w_n = -1.0;
}

ps_status ps_check_formulations(const char* formulations) {
  PS_REQUIRE(formulations, "null argument");
  return guarded([&] { sim::parse_formulations(formulations); });
}

ps_status ps_run_closed_loop(const ps_scenario* scenario,
                             const char* formulation,
                             const ps_sim_config* config, ps_run** out) {
  PS_REQUIRE(scenario && formulation && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const sim::SimConfig sc = to_sim_config(config);
    auto run = std::make_unique<ps_run>();
    run->scenario = scenario->scenario;
    if (sc.w_n) run->scenario.w_n = *sc.w_n;
    run->formulation = to_formulation(formulation, config);
    run->t_sim = sc.t_sim;
    run->result = sim::run_closed_loop(run->scenario, run->formulation, sc);
    run->metrics = sim::compute_metrics(run->result, run->scenario, sc.t_sim);
    *out = run.release();
  });
}

void ps_run_destroy(ps_run* run) { delete run; }

ps_status ps_run_metrics(const ps_run* run, ps_metrics* metrics) {
  PS_REQUIRE(run && metrics, "null argument");
  fill_metrics(run->metrics, run->result.completed,
               static_cast<int>(run->result.steps.size()), metrics);
  return PS_OK;
}

const char* ps_run_error(const ps_run* run) {
  return run == nullptr ? "" : run->result.error.c_str();
}

ps_status ps_run_write_log(const ps_run* run, const char* file) {
  PS_REQUIRE(run && file, "null argument");
  return guarded([&] {
    std::ofstream out = open_out(file);
    io::write_run_log(run->scenario, run->formulation, run->result,
                      run->metrics, out);
    close_out(out, file);
  });
}

ps_status ps_run_write_metrics(const ps_run* run, const char* file) {
  PS_REQUIRE(run && file, "null argument");
  return guarded([&] {
    sim::RunRecord rec;
    rec.seed = run->scenario.seed;
    rec.formulation = run->formulation.name;
    rec.completed = run->result.completed;
    rec.error = run->result.error;
    rec.metrics = run->metrics;
    std::ofstream out = open_out(file);
    io::write_metrics_csv(std::span<const sim::RunRecord>(&rec, 1), out);
    close_out(out, file);
  });
}

ps_status ps_experiment_run(int experiment, int n_scenarios, uint64_t seed0,
                            const char* formulations,
                            const ps_sim_config* config, const char* log_dir,
                            ps_experiment** out) {
  PS_REQUIRE(formulations && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const sim::SimConfig sc = to_sim_config(config);
    std::vector<sim::Formulation> forms = sim::parse_formulations(formulations);
    for (auto& f : forms) f = to_formulation(f.name.c_str(), config);
    std::optional<std::filesystem::path> dir;
    if (log_dir != nullptr) {
      dir = log_dir;
      std::error_code ec;
      std::filesystem::create_directories(*dir, ec);
      if (ec) throw IoError("cannot create '" + dir->string() + "'");
    }
    sim::RunCallback on_run;
    if (dir) {
      on_run = [&dir](const sim::Scenario& scn, const sim::Formulation& f,
                      const sim::SimResult& res, const sim::Metrics& m) {
        const std::string file =
            (*dir / ("run_seed" + std::to_string(scn.seed) + "_" + f.name +
                     ".jsonl"))
                .string();
        std::ofstream o = open_out(file.c_str());
        io::write_run_log(scn, f, res, m, o);
        close_out(o, file.c_str());
      };
    }
    auto result = std::make_unique<ps_experiment>();
    result->result = sim::run_experiment(experiment, n_scenarios, forms, sc,
                                         seed0, {}, on_run);
    *out = result.release();
  });
}

void ps_experiment_destroy(ps_experiment* experiment) { delete experiment; }

ps_status ps_experiment_summary(const ps_experiment* experiment,
                                const char* formulation, const char* metric,
                                ps_distribution* out, int* completed,
                                int* failed, int* collisions) {
  PS_REQUIRE(experiment && formulation && metric && out, "null argument");
  return guarded([&] {
    const sim::FormulationSummary& s = experiment->result.summary(formulation);
    const std::string m(metric);
    const sim::Distribution* d = nullptr;
    if (m == "delta_n_max") {
      d = &s.delta_n_max;
    } else if (m == "delta_n_min") {
      d = &s.delta_n_min;
    } else if (m == "delta_s") {
      d = &s.delta_s;
    } else if (m == "solve_ms_median") {
      d = &s.solve_ms_median;
    } else {
      throw DomainError("unknown metric '" + m + "'");
    }
    *out = {d->count, d->min, d->q1, d->median, d->q3, d->max};
    if (completed) *completed = s.completed;
    if (failed) *failed = s.failed;
    if (collisions) *collisions = s.collisions;
  });
}

ps_status ps_experiment_write_metrics(const ps_experiment* experiment,
                                      const char* file) {
  PS_REQUIRE(experiment && file, "null argument");
  return guarded([&] {
    std::ofstream out = open_out(file);
    io::write_metrics_csv(experiment->result.runs, out);
    close_out(out, file);
  });
}

ps_status ps_experiment_write_summary(const ps_experiment* experiment,
                                      const char* file) {
  PS_REQUIRE(experiment && file, "null argument");
  return guarded([&] {
    std::ofstream out = open_out(file);
    io::write_summary_csv(experiment->result, out);
    close_out(out, file);
  });
}

ps_status ps_controller_create(const ps_path* path, const char* formulation,
                               const ps_sim_config* config, double v_ref,
                               double w_n, ps_controller** out) {
  PS_REQUIRE(path && formulation && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    sim::SimConfig sc = to_sim_config(config);
    ocp::OcpConfig& oc = sc.controller.ocp;
    oc.v_ref = v_ref;
    oc.road_width = path->path.width();
    oc.set_lateral_weight(w_n);
    oc.validate();
    const sim::Formulation f = to_formulation(formulation, config);
    *out = new ps_controller{
        rti::Controller(sc.controller, f.schedule(oc.horizon),
                        vehicle::make_lookup(path->path.profile())),
        {},
        false};
  });
}

void ps_controller_destroy(ps_controller* controller) { delete controller; }

ps_status ps_controller_step(ps_controller* controller, const double* x,
                             const double* svs, const double* dims, int m,
                             double* u) {
  PS_REQUIRE(controller && x && u && m >= 0, "null argument");
  PS_REQUIRE(m == 0 || (svs && dims), "null SV arrays");
  return guarded([&] {
    const ocp::StateVec xs = Eigen::Map<const ocp::StateVec>(x);
    std::vector<rti::SurroundingVehicle> list(m);
    for (int j = 0; j < m; ++j) {
      list[j].state = Eigen::Map<const ocp::StateVec>(svs + 5 * j);
      list[j].theta = {dims[2 * j], dims[2 * j + 1]};
      list[j].theta.validate();
    }
    vehicle::InputVec uv;
    if (!controller->started) {
      controller->controller.initialize(xs);
      uv = controller->controller.iterate(xs, list);
      controller->started = true;
    } else {
      uv = controller->controller.step(xs, list);
    }
    controller->last = controller->controller.telemetry();
    u[0] = uv[0];
    u[1] = uv[1];
  });
}

ps_status ps_controller_last_solve(const ps_controller* controller,
                                   int* qp_iterations, double* step_time_s,
                                   double* kkt_residual) {
  PS_REQUIRE(controller, "null argument");
  if (qp_iterations) *qp_iterations = controller->last.qp_iterations;
  if (step_time_s) *step_time_s = controller->last.step_time_s;
  if (kkt_residual) *kkt_residual = controller->last.residuals.max();
  return PS_OK;
}

}  // extern "C"
