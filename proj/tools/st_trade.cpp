// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner CLI. Links only the public C API.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "stsim.h"

int main(int argc, char** argv) {
  CLI::App app{"spectrum trading experiment runner"};

  std::string config_path;
  std::string sweep = "fs";
  std::string out_dir = ".";
  std::string format = "csv,json";
  std::string mode = "both";
  uint64_t seed = 0;
  bool seed_set = false;

  app.add_option("--config", config_path, "run configuration (JSON)")
      ->required();
  app.add_option("--seed", seed, "master seed override")
      ->each([&seed_set](const std::string&) { seed_set = true; });
  app.add_option("--sweep", sweep, "sweep kind: fs|mu")
      ->check(CLI::IsMember({"fs", "mu"}));
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "report formats: csv,json");
  app.add_option("--mode", mode, "st|nonst|both")
      ->check(CLI::IsMember({"st", "nonst", "both"}));

  CLI11_PARSE(app, argc, argv);

  bool want_csv = format.find("csv") != std::string::npos;
  bool want_json = format.find("json") != std::string::npos;
  if (!want_csv && !want_json) {
    std::fprintf(stderr, "error: --format must include csv and/or json\n");
    return 2;
  }

  st_experiment* exp = nullptr;
  st_status rc = st_experiment_create(config_path.c_str(), &exp);
  if (rc != ST_OK) {
    std::fprintf(stderr, "error: %s\n", st_last_error());
    return 1;
  }
  if (seed_set) st_experiment_set_seed(exp, seed);
  st_experiment_set_sweep(exp, sweep.c_str());
  st_experiment_set_mode(exp, mode.c_str());

  rc = st_experiment_run(exp);
  if (rc != ST_OK) {
    std::fprintf(stderr, "error: %s\n", st_last_error());
    st_experiment_free(exp);
    return 1;
  }

  int points = st_experiment_point_count(exp);
  for (int i = 0; i < points; ++i) {
    st_point_summary s;
    if (st_experiment_point_summary(exp, i, &s) != ST_OK) continue;
    std::printf("%s=%g  mean improvement %.2f%%  (min %.2f%%, max %.2f%%, "
                "%d/%d feasible)\n",
                sweep.c_str(), s.sweep_value, s.mean_improvement_pct,
                s.min_improvement_pct, s.max_improvement_pct,
                s.feasible_replications, s.replications);
  }

  rc = st_experiment_write_reports(exp, out_dir.c_str(), want_csv ? 1 : 0,
                                   want_json ? 1 : 0);
  if (rc != ST_OK) {
    std::fprintf(stderr, "error: %s\n", st_last_error());
    st_experiment_free(exp);
    return 1;
  }
  st_experiment_free(exp);
  return 0;
}
