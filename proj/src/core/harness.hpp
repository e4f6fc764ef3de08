// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "core/chain.hpp"
#include "core/protocol.hpp"

namespace stsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string topology_path;
  int von_count = 50;
  int slots = 4;
  std::vector<int> fs_sweep = {2, 4, 6, 8, 10};
  double threshold_mu = -30.0;
  std::vector<double> mu_sweep = {0, -10, -20, -30, -40, -50};
  int mu_sweep_fs = 8;  // FSs per virtual link used for the mu sweep
  bool vcat_mode = true;
  int guard_fs = 0;
  int fs_total = 358;
  uint64_t seed = 1;
  int replications = 10;
  int k_paths = 3;
  int embed_retries = 50;

  static RunConfig load_file(const std::string& path);
  static RunConfig load_text(const std::string& text);
  std::string to_json() const;
  void validate() const;
};

enum class SweepKind { Fs, Mu };
enum class RunMode { St, NonSt, Both };

SweepKind parse_sweep(const std::string& s);
RunMode parse_mode(const std::string& s);

// One (mode, replication) simulation outcome.
struct SimResult {
  double offered = 0.0;
  double carried = 0.0;
  int chain_blocks = 0;
  int trades = 0;
  std::vector<uint8_t> chain_bytes;
  Credit ledger_sum = kCreditScale;  // 0 when the run kept zero-sum
  uint64_t grid_violations = 0;
};

struct RepOutcome {
  int replication = 0;
  uint64_t seed = 0;
  int embed_retries = 0;
  bool feasible = true;
  SimResult st;
  SimResult non_st;
  double improvement_pct = 0.0;
};

struct PointOutcome {
  double sweep_value = 0.0;
  std::vector<RepOutcome> reps;
  double mean_improvement_pct = 0.0;
  double min_improvement_pct = 0.0;
  double max_improvement_pct = 0.0;
  int feasible_reps = 0;
};

struct Report {
  RunConfig config;
  SweepKind sweep = SweepKind::Fs;
  RunMode mode = RunMode::Both;
  std::vector<PointOutcome> points;
};

// Runs one paired simulation point: embed + demands once, then non-ST
// and ST over identical inputs.
RepOutcome run_replication(const Topology& topo, const RunConfig& cfg,
                           int fs_per_vlink, double mu, int replication,
                           RunMode mode, uint64_t point_key);

Report run_experiment(const RunConfig& cfg, SweepKind sweep, RunMode mode);

void write_csv(const Report& report, const std::string& path);
void write_json(const Report& report, const std::string& path);

}  // namespace stsim
