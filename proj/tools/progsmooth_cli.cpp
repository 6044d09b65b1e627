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

// progsmooth command-line tool.
//
//   progsmooth run         --seed 7 --experiment 1 --formulation scalednorm
//   progsmooth experiment  --id 2 --n 20 --formulations scalednorm,pnorm4
//   progsmooth shapes      --kind boltzmann --alphas 0.1,1,5,20
//   progsmooth path-export --seed 7 --experiment 1
//
// Every invocation writes into its own output directory together with
// resolved_config.ini, which can be passed back through --config.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "progsmooth/progsmooth.h"

namespace {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitIo = 4,
  kExitRuntime = 5,
};

struct CliError : std::runtime_error {
  CliError(int code, std::string kind, const std::string& message)
      : std::runtime_error(message), code(code), kind(std::move(kind)) {}
  int code;
  std::string kind;
};

// Mirrors the config-file keys one to one.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  int experiment = 1;
  int n = 20;
  std::uint64_t seed0 = 1;
  std::string formulation = "scalednorm";
  std::string formulations = "scalednorm,pnorm2,pnorm4,pnorm6,lse,boltzmann,relu2";
  std::string kind = "scalednorm";
  std::string alphas = "2,4,8,16";
  double lo = -2.0;
  double hi = 2.0;
  int points = 201;
  double ds = 0.5;
  double t_sim = 15.0;
  int horizon = 70;
  double t_d = 0.1;
  double slack_weight = 1e4;
  double kkt_tol = 1e-8;
  int max_iter = 100;
  double d0 = 1.005;
  double dn = 1.4142135623730951;
  double w_n = -1.0;
  bool logs = false;
  std::string out;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v{};
  in >> v;
  if (!in || !(in >> std::ws).eof()) {
    throw CliError(kExitConfig, "config", "bad value for '" + key + "': " + text);
  }
  return v;
}

template <>
std::string parse_value<std::string>(const std::string&,
                                     const std::string& text) {
  return text;
}

template <>
bool parse_value<bool>(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw CliError(kExitConfig, "config", "bad value for '" + key + "': " + text);
}

#define RUN_CONFIG_FIELDS(X)                                           \
  X(command) X(seed) X(experiment) X(n) X(seed0) X(formulation)        \
  X(formulations) X(kind) X(alphas) X(lo) X(hi) X(points) X(ds) X(t_sim) \
  X(horizon) X(t_d) X(slack_weight) X(kkt_tol) X(max_iter) X(d0) X(dn) \
  X(w_n) X(logs) X(out)

// Calls f(key, field) for every field.
template <typename Config, typename F>
void for_each_field(Config& c, F&& f) {
#define X(name) f(#name, c.name);
  RUN_CONFIG_FIELDS(X)
#undef X
}

void load_config(const std::string& file, RunConfig& cfg) {
  std::ifstream in(file);
  if (!in) throw CliError(kExitConfig, "config", "cannot read config '" + file + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CliError(kExitConfig, "config",
                     file + ":" + std::to_string(lineno) + ": expected key = value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  for_each_field(cfg, [&kv](const char* key, auto& field) {
    const auto it = kv.find(key);
    if (it == kv.end()) return;
    field = parse_value<std::decay_t<decltype(field)>>(key, it->second);
    kv.erase(it);
  });
  if (!kv.empty()) {
    throw CliError(kExitConfig, "config", "unknown config key '" + kv.begin()->first + "'");
  }
}

void write_resolved(const RunConfig& cfg, const std::filesystem::path& dir) {
  const auto file = dir / "resolved_config.ini";
  std::ofstream out(file);
  out.precision(17);
  for_each_field(cfg, [&out](const char* key, const auto& field) {
    out << key << " = " << field << '\n';
  });
  if (!out) throw CliError(kExitIo, "io", "cannot write " + file.string());
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_value<double>("alphas", item));
  }
  return out;
}

void validate(const RunConfig& c) {
  auto bad = [](const std::string& m) { throw CliError(kExitConfig, "config", m); };
  if (c.experiment != 1 && c.experiment != 2) bad("experiment must be 1 or 2");
  if (c.n < 1) bad("n must be at least 1");
  if (c.horizon < 1) bad("horizon must be at least 1");
  if (!(c.t_d > 0.0) || !(c.t_sim > 0.0)) bad("t_d and t_sim must be positive");
  if (!(c.kkt_tol > 0.0) || c.max_iter < 1) bad("invalid solver settings");
  if (!(c.slack_weight > 0.0)) bad("slack_weight must be positive");
  if (!(c.d0 > 1.0) || !(c.d0 <= c.dn)) bad("need 1 < d0 <= dn");
  if (c.points < 2 || !(c.hi > c.lo)) bad("need points >= 2 and hi > lo");
  if (!(c.ds > 0.0)) bad("ds must be positive");
  if (c.command == "run" && ps_check_formulations(c.formulation.c_str()) != PS_OK) {
    bad(ps_last_error());
  }
  if (c.command == "experiment" &&
      ps_check_formulations(c.formulations.c_str()) != PS_OK) {
    bad(ps_last_error());
  }
  if (c.command == "shapes" && parse_list(c.alphas).empty()) bad("alphas is empty");
}

void check(ps_status st) {
  if (st == PS_OK) return;
  const int code = st == PS_ERR_IO ? kExitIo : kExitRuntime;
  throw CliError(code, ps_status_name(st), ps_last_error());
}

ps_sim_config sim_config(const RunConfig& c) {
  ps_sim_config sc;
  ps_sim_config_default(&sc);
  sc.horizon = c.horizon;
  sc.t_d = c.t_d;
  sc.t_sim = c.t_sim;
  sc.slack_weight = c.slack_weight;
  sc.kkt_tol = c.kkt_tol;
  sc.max_iter = c.max_iter;
  sc.d0 = c.d0;
  sc.dn = c.dn;
  sc.w_n = c.w_n;
  return sc;
}

std::string fmt_double(double v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

int cmd_run(const RunConfig& c, const std::filesystem::path& dir) {
  ps_scenario* scn = nullptr;
  check(ps_scenario_randomize(c.seed, c.experiment, &scn));
  const ps_sim_config sc = sim_config(c);
  ps_run* run = nullptr;
  const ps_status st = ps_run_closed_loop(scn, c.formulation.c_str(), &sc, &run);
  ps_scenario_destroy(scn);
  check(st);
  const std::string base = "run_seed" + std::to_string(c.seed) + "_" + c.formulation;
  ps_status w = ps_run_write_log(run, (dir / (base + ".jsonl")).string().c_str());
  if (w == PS_OK) w = ps_run_write_metrics(run, (dir / "metrics.csv").string().c_str());
  ps_metrics m{};
  ps_run_metrics(run, &m);
  const std::string err = ps_run_error(run);
  ps_run_destroy(run);
  check(w);
  std::cout << "seed=" << c.seed << " formulation=" << c.formulation
            << " completed=" << m.completed << " steps=" << m.steps;
  if (m.has_delta_n) {
    std::cout << " delta_n_min=" << m.delta_n_min << " delta_n_max=" << m.delta_n_max;
  }
  std::cout << " delta_s=" << m.delta_s << " solve_ms_median=" << m.solve_ms_median
            << " collision=" << m.collision << '\n';
  if (!m.completed) throw CliError(kExitRuntime, "controller", err);
  return kExitOk;
}

int cmd_experiment(const RunConfig& c, const std::filesystem::path& dir) {
  const ps_sim_config sc = sim_config(c);
  ps_experiment* ex = nullptr;
  const std::string logs = (dir / "runs").string();
  check(ps_experiment_run(c.experiment, c.n, c.seed0, c.formulations.c_str(), &sc,
                          c.logs ? logs.c_str() : nullptr, &ex));
  ps_status w = ps_experiment_write_metrics(ex, (dir / "metrics.csv").string().c_str());
  if (w == PS_OK) {
    w = ps_experiment_write_summary(ex, (dir / "summary.csv").string().c_str());
  }
  std::stringstream ss(c.formulations);
  std::string f;
  std::printf("%-12s %5s %5s %5s %12s %12s %10s\n", "formulation", "ok",
              "fail", "coll", "dn_max_med", "dn_min_min", "ds_med");
  while (std::getline(ss, f, ',')) {
    if (f.empty()) continue;
    ps_distribution dmax{}, dmin{}, ds{};
    int ok = 0, failed = 0, coll = 0;
    ps_experiment_summary(ex, f.c_str(), "delta_n_max", &dmax, &ok, &failed, &coll);
    ps_experiment_summary(ex, f.c_str(), "delta_n_min", &dmin, nullptr, nullptr, nullptr);
    ps_experiment_summary(ex, f.c_str(), "delta_s", &ds, nullptr, nullptr, nullptr);
    std::printf("%-12s %5d %5d %5d %12s %12s %10s\n", f.c_str(), ok, failed, coll,
                dmax.count ? fmt_double(dmax.median).c_str() : "-",
                dmin.count ? fmt_double(dmin.min).c_str() : "-",
                ds.count ? fmt_double(ds.median).c_str() : "-");
  }
  ps_experiment_destroy(ex);
  check(w);
  return kExitOk;
}

int cmd_shapes(const RunConfig& c, const std::filesystem::path& dir) {
  for (double a : parse_list(c.alphas)) {
    const std::string file =
        (dir / ("contour_" + c.kind + "_alpha" + fmt_double(a) + ".csv")).string();
    check(ps_shape_write_contour_csv(c.kind.c_str(), a, c.lo, c.hi, c.points,
                                     file.c_str()));
    std::cout << file << '\n';
  }
  return kExitOk;
}

int cmd_path_export(const RunConfig& c, const std::filesystem::path& dir) {
  ps_scenario* scn = nullptr;
  check(ps_scenario_randomize(c.seed, c.experiment, &scn));
  ps_path* path = nullptr;
  const ps_status st = ps_scenario_path(scn, c.ds, &path);
  ps_scenario_destroy(scn);
  check(st);
  const std::string file = (dir / ("path_seed" + std::to_string(c.seed) + ".csv")).string();
  const ps_status w = ps_path_write_csv(path, file.c_str());
  ps_path_destroy(path);
  check(w);
  std::cout << file << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Progressive obstacle smoothing for overtaking NMPC"};
  app.require_subcommand(1);
  RunConfig cli;
  std::string config_file;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "key = value file");
    sub->add_option("--out", cli.out, "output directory");
    sub->add_option("--horizon", cli.horizon, "shooting intervals N");
    sub->add_option("--t-d", cli.t_d, "sampling time (s)");
    sub->add_option("--t-sim", cli.t_sim, "simulated time (s)");
    sub->add_option("--slack-weight", cli.slack_weight, "L1 weight on obstacle slacks");
    sub->add_option("--kkt-tol", cli.kkt_tol, "QP KKT tolerance");
    sub->add_option("--max-iter", cli.max_iter, "QP iteration limit");
    sub->add_option("--d0", cli.d0, "first-stage width");
    sub->add_option("--dn", cli.dn, "last-stage width");
    sub->add_option("--w-n", cli.w_n, "lateral weight override");
  };

  CLI::App* run = app.add_subcommand("run", "closed-loop run of one scenario");
  common(run);
  run->add_option("--seed", cli.seed);
  run->add_option("--experiment", cli.experiment);
  run->add_option("--formulation", cli.formulation);

  CLI::App* exp = app.add_subcommand("experiment", "paired batch over seeds");
  common(exp);
  exp->add_option("--id", cli.experiment);
  exp->add_option("--n", cli.n);
  exp->add_option("--seed0", cli.seed0);
  exp->add_option("--formulations", cli.formulations);
  exp->add_flag("--logs", cli.logs, "write one run log per run");

  CLI::App* shapes = app.add_subcommand("shapes", "contour data of a shape family");
  common(shapes);
  shapes->add_option("--kind", cli.kind);
  shapes->add_option("--alphas", cli.alphas);
  shapes->add_option("--lo", cli.lo);
  shapes->add_option("--hi", cli.hi);
  shapes->add_option("--points", cli.points);

  CLI::App* pexp = app.add_subcommand("path-export", "sampled road of a scenario");
  common(pexp);
  pexp->add_option("--seed", cli.seed);
  pexp->add_option("--experiment", cli.experiment);
  pexp->add_option("--ds", cli.ds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: code=" << kExitUsage << " kind=usage message=" << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    // Config file first, then explicitly given flags on top.
    RunConfig cfg;
    if (!config_file.empty()) load_config(config_file, cfg);
    auto given = [sub](std::string flag) {
      for (auto& ch : flag) {
        if (ch == '_') ch = '-';
      }
      for (const CLI::Option* opt : sub->get_options()) {
        if (opt->count() > 0 && opt->check_lname(flag)) return true;
      }
      return false;
    };
#define X(name) \
    if (given(#name)) cfg.name = cli.name;
    RUN_CONFIG_FIELDS(X)
#undef X
    if (sub == exp && given("id")) cfg.experiment = cli.experiment;
    cfg.command = sub->get_name();
    if (cfg.out.empty()) cfg.out = "progsmooth-" + cfg.command;
    validate(cfg);

    const std::filesystem::path dir(cfg.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw CliError(kExitIo, "io", "cannot create '" + cfg.out + "': " + ec.message());
    write_resolved(cfg, dir);

    if (sub == run) return cmd_run(cfg, dir);
    if (sub == exp) return cmd_experiment(cfg, dir);
    if (sub == shapes) return cmd_shapes(cfg, dir);
    return cmd_path_export(cfg, dir);
  } catch (const CliError& e) {
    std::cerr << "error: code=" << e.code << " kind=" << e.kind << " message=" << e.what() << '\n';
    return e.code;
  }
}
