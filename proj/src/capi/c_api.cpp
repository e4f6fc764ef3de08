// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#include "stsim.h"

#include <filesystem>
#include <optional>
#include <string>

#include "core/harness.hpp"
#include "core/topology.hpp"

namespace {

thread_local std::string g_last_error;

st_status set_error(st_status code, const std::string& what) {
  g_last_error = what;
  return code;
}

template <typename Fn>
st_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const stsim::TopologyError& e) {
    return set_error(ST_ERR_PARSE, e.what());
  } catch (const stsim::ConfigError& e) {
    return set_error(ST_ERR_PARSE, e.what());
  } catch (const std::exception& e) {
    return set_error(ST_ERR_RUNTIME, e.what());
  }
}

}  // namespace

struct st_topology {
  stsim::Topology topo;
};

struct st_experiment {
  stsim::RunConfig config;
  stsim::SweepKind sweep = stsim::SweepKind::Fs;
  stsim::RunMode mode = stsim::RunMode::Both;
  std::optional<stsim::Report> report;
};

extern "C" {

const char* st_version(void) { return "stsim 1.0.0"; }

const char* st_last_error(void) { return g_last_error.c_str(); }

st_status st_topology_load(const char* path, st_topology** out) {
  if (!path || !out) return set_error(ST_ERR_INVALID, "null argument");
  if (!std::filesystem::exists(path))
    return set_error(ST_ERR_IO, std::string("no such file: ") + path);
  return guarded([&] {
    auto* handle = new st_topology{stsim::Topology::load_file(path)};
    *out = handle;
    return ST_OK;
  });
}

void st_topology_free(st_topology* topo) { delete topo; }

int st_topology_node_count(const st_topology* topo) {
  return topo ? topo->topo.node_count() : -1;
}

int st_topology_link_count(const st_topology* topo) {
  return topo ? topo->topo.link_count() : -1;
}

double st_topology_normalized_length(const st_topology* topo, int link_id) {
  if (!topo || link_id < 0 || link_id >= topo->topo.link_count()) return -1.0;
  return topo->topo.normalized_length(link_id);
}

st_status st_experiment_create(const char* config_path, st_experiment** out) {
  if (!config_path || !out) return set_error(ST_ERR_INVALID, "null argument");
  if (!std::filesystem::exists(config_path))
    return set_error(ST_ERR_IO, std::string("no such file: ") + config_path);
  return guarded([&] {
    auto* handle = new st_experiment;
    try {
      handle->config = stsim::RunConfig::load_file(config_path);
    } catch (...) {
      delete handle;
      throw;
    }
    *out = handle;
    return ST_OK;
  });
}

void st_experiment_free(st_experiment* exp) { delete exp; }

st_status st_experiment_set_seed(st_experiment* exp, uint64_t seed) {
  if (!exp) return set_error(ST_ERR_INVALID, "null experiment");
  exp->config.seed = seed;
  return ST_OK;
}

st_status st_experiment_set_sweep(st_experiment* exp, const char* sweep) {
  if (!exp || !sweep) return set_error(ST_ERR_INVALID, "null argument");
  try {
    exp->sweep = stsim::parse_sweep(sweep);
  } catch (const std::exception& e) {
    return set_error(ST_ERR_INVALID, e.what());
  }
  return ST_OK;
}

st_status st_experiment_set_mode(st_experiment* exp, const char* mode) {
  if (!exp || !mode) return set_error(ST_ERR_INVALID, "null argument");
  try {
    exp->mode = stsim::parse_mode(mode);
  } catch (const std::exception& e) {
    return set_error(ST_ERR_INVALID, e.what());
  }
  return ST_OK;
}

st_status st_experiment_run(st_experiment* exp) {
  if (!exp) return set_error(ST_ERR_INVALID, "null experiment");
  return guarded([&] {
    exp->report = stsim::run_experiment(exp->config, exp->sweep, exp->mode);
    return ST_OK;
  });
}

st_status st_experiment_write_reports(const st_experiment* exp,
                                      const char* out_dir, int write_csv,
                                      int write_json) {
  if (!exp || !out_dir) return set_error(ST_ERR_INVALID, "null argument");
  if (!exp->report)
    return set_error(ST_ERR_INVALID, "experiment has not been run");
  return guarded([&] {
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return set_error(ST_ERR_IO, "cannot create " + dir.string());
    if (write_csv) stsim::write_csv(*exp->report, (dir / "report.csv").string());
    if (write_json)
      stsim::write_json(*exp->report, (dir / "report.json").string());
    return ST_OK;
  });
}

int st_experiment_point_count(const st_experiment* exp) {
  if (!exp || !exp->report) return -1;
  return static_cast<int>(exp->report->points.size());
}

st_status st_experiment_point_summary(const st_experiment* exp, int index,
                                      st_point_summary* out) {
  if (!exp || !out) return set_error(ST_ERR_INVALID, "null argument");
  if (!exp->report)
    return set_error(ST_ERR_INVALID, "experiment has not been run");
  if (index < 0 || index >= static_cast<int>(exp->report->points.size()))
    return set_error(ST_ERR_INVALID, "point index out of range");
  const stsim::PointOutcome& p = exp->report->points[index];
  out->sweep_value = p.sweep_value;
  out->mean_improvement_pct = p.mean_improvement_pct;
  out->min_improvement_pct = p.min_improvement_pct;
  out->max_improvement_pct = p.max_improvement_pct;
  out->feasible_replications = p.feasible_reps;
  out->replications = static_cast<int>(p.reps.size());
  return ST_OK;
}

}  // extern "C"
