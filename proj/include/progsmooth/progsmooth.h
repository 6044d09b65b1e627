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

/* C interface to the progsmooth library.
 *
 * Every function returns a ps_status. On failure the message is available
 * from ps_last_error() until the next failing call on the same thread.
 * Objects are opaque handles released with the matching *_destroy function;
 * destroy functions accept NULL. */
#ifndef PROGSMOOTH_PROGSMOOTH_H_
#define PROGSMOOTH_PROGSMOOTH_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PS_API __declspec(dllexport)
#else
#define PS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ps_status {
  PS_OK = 0,
  PS_ERR_INVALID_ARGUMENT = 1,
  PS_ERR_DOMAIN = 2,
  PS_ERR_NUMERIC = 3,
  PS_ERR_SINGULAR = 4,
  PS_ERR_OUT_OF_RANGE = 5,
  PS_ERR_DIMENSION = 6,
  PS_ERR_IO = 7,
  PS_ERR_INTERNAL = 8
} ps_status;

typedef struct ps_path ps_path;
typedef struct ps_scenario ps_scenario;
typedef struct ps_run ps_run;
typedef struct ps_experiment ps_experiment;
typedef struct ps_controller ps_controller;

PS_API const char* ps_version(void);
PS_API const char* ps_last_error(void);
/* Short name of a status code, e.g. "domain". */
PS_API const char* ps_status_name(ps_status status);

/* ---- shapes ----------------------------------------------------------- */

/* kind: "scalednorm", "lse", "boltzmann", "pnorm", "relu2". */
PS_API ps_status ps_shape_eval(const char* kind, double alpha,
                               const double* xi, int dim, double* value);
PS_API ps_status ps_shape_grad(const char* kind, double alpha,
                               const double* xi, int dim, double* grad);
PS_API ps_status ps_alpha_from_width(const char* kind, double d_bar, int dim,
                                     double* alpha);
/* Square grid [lo, hi]^2 with `points` samples per axis. */
PS_API ps_status ps_shape_write_contour_csv(const char* kind, double alpha,
                                            double lo, double hi, int points,
                                            const char* file);

/* ---- reference path --------------------------------------------------- */

/* Piecewise-linear curvature through (breakpoints[i], kappa[i]). */
PS_API ps_status ps_path_create(const double* breakpoints,
                                const double* kappa, int count, double length,
                                double ds, double width, ps_path** out);
PS_API void ps_path_destroy(ps_path* path);
PS_API ps_status ps_path_length(const ps_path* path, double* length);
PS_API ps_status ps_path_to_frenet(const ps_path* path, double x, double y,
                                   double phi, double* s, double* n,
                                   double* beta);
PS_API ps_status ps_path_to_cartesian(const ps_path* path, double s, double n,
                                      double beta, double* x, double* y,
                                      double* phi);
PS_API ps_status ps_path_write_csv(const ps_path* path, const char* file);

/* ---- scenarios -------------------------------------------------------- */

PS_API ps_status ps_scenario_randomize(uint64_t seed, int experiment,
                                       ps_scenario** out);
PS_API void ps_scenario_destroy(ps_scenario* scenario);
/* Road of the scenario sampled every ds metres. */
PS_API ps_status ps_scenario_path(const ps_scenario* scenario, double ds,
                                  ps_path** out);
/* Copies a JSON description into buf (NUL-terminated, truncated to cap) and
 * stores the full length without the terminator in *needed. */
PS_API ps_status ps_scenario_json(const ps_scenario* scenario, char* buf,
                                  size_t cap, size_t* needed);

/* ---- simulation ------------------------------------------------------- */

typedef struct ps_sim_config {
  int horizon;         /* shooting intervals N */
  double t_d;          /* s */
  double t_sim;        /* s */
  double slack_weight; /* L1 weight on obstacle rows */
  double kkt_tol;
  int max_iter;
  double d0;  /* width schedule start, homotopies only */
  double dn;  /* width schedule end */
  double w_n; /* lateral weight override, < 0 keeps the scenario value */
} ps_sim_config;

PS_API void ps_sim_config_default(ps_sim_config* config);

typedef struct ps_metrics {
  int completed;
  int has_delta_n; /* 0 when the ego was never alongside the SV */
  double delta_n_max;
  double delta_n_min;
  double delta_s;
  double solve_ms_median;
  double solve_ms_max;
  int collision;
  int window_steps;
  int degraded_steps;
  int steps;
} ps_metrics;

/* formulation: "scalednorm", "lse", "boltzmann", "pnorm2", "pnorm4",
 * "pnorm6", "relu2". A controller failure does not fail the call; it is
 * reported through ps_metrics.completed and ps_run_error. */
/* PS_OK when every name in the comma-separated list is a formulation. */
PS_API ps_status ps_check_formulations(const char* formulations);

PS_API ps_status ps_run_closed_loop(const ps_scenario* scenario,
                                    const char* formulation,
                                    const ps_sim_config* config,
                                    ps_run** out);
PS_API void ps_run_destroy(ps_run* run);
PS_API ps_status ps_run_metrics(const ps_run* run, ps_metrics* metrics);
/* Empty string when the run completed. Valid while the run lives. */
PS_API const char* ps_run_error(const ps_run* run);
PS_API ps_status ps_run_write_log(const ps_run* run, const char* file);
PS_API ps_status ps_run_write_metrics(const ps_run* run, const char* file);

typedef struct ps_distribution {
  int count;
  double min;
  double q1;
  double median;
  double q3;
  double max;
} ps_distribution;

/* Runs every formulation (comma-separated) on seeds seed0 .. seed0+n-1.
 * When log_dir is non-NULL a run log is written per run into it. */
PS_API ps_status ps_experiment_run(int experiment, int n_scenarios,
                                   uint64_t seed0, const char* formulations,
                                   const ps_sim_config* config,
                                   const char* log_dir, ps_experiment** out);
PS_API void ps_experiment_destroy(ps_experiment* experiment);
/* metric: "delta_n_max", "delta_n_min", "delta_s", "solve_ms_median".
 * Any of the int outputs may be NULL. */
PS_API ps_status ps_experiment_summary(const ps_experiment* experiment,
                                       const char* formulation,
                                       const char* metric,
                                       ps_distribution* out, int* completed,
                                       int* failed, int* collisions);
PS_API ps_status ps_experiment_write_metrics(const ps_experiment* experiment,
                                             const char* file);
PS_API ps_status ps_experiment_write_summary(const ps_experiment* experiment,
                                             const char* file);

/* ---- controller ------------------------------------------------------- */

/* RTI controller on `path`'s curvature profile. */
PS_API ps_status ps_controller_create(const ps_path* path,
                                      const char* formulation,
                                      const ps_sim_config* config,
                                      double v_ref, double w_n,
                                      ps_controller** out);
PS_API void ps_controller_destroy(ps_controller* controller);
/* x: [s, n, beta, v, delta]; svs: m rows of [s, n, beta, v, delta];
 * dims: m rows of [length, width] of the inflated rectangles; u: [F_d, r]. */
PS_API ps_status ps_controller_step(ps_controller* controller,
                                    const double* x, const double* svs,
                                    const double* dims, int m, double* u);
/* Telemetry of the last step. */
PS_API ps_status ps_controller_last_solve(const ps_controller* controller,
                                          int* qp_iterations,
                                          double* step_time_s,
                                          double* kkt_residual);

#ifdef __cplusplus
}
#endif

#endif /* PROGSMOOTH_PROGSMOOTH_H_ */
