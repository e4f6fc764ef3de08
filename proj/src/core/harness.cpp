// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#include "core/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace stsim {

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_text(ss.str());
}

RunConfig RunConfig::load_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  auto get = [&doc](const char* key, auto& field) {
    if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("topology", cfg.topology_path);
  get("von_count", cfg.von_count);
  get("slots", cfg.slots);
  get("fs_per_vlink", cfg.fs_sweep);
  get("threshold_mu", cfg.threshold_mu);
  get("mu_sweep", cfg.mu_sweep);
  get("mu_sweep_fs", cfg.mu_sweep_fs);
  get("vcat_mode", cfg.vcat_mode);
  get("guard_fs", cfg.guard_fs);
  get("fs_total", cfg.fs_total);
  get("seed", cfg.seed);
  get("replications", cfg.replications);
  get("k_paths", cfg.k_paths);
  get("embed_retries", cfg.embed_retries);
  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  if (topology_path.empty()) throw ConfigError("topology path missing");
  if (von_count <= 0 || slots <= 0 || fs_total <= 0 || replications <= 0 ||
      k_paths <= 0)
    throw ConfigError("counts must be positive");
  if (guard_fs < 0) throw ConfigError("guard_fs must be >= 0");
  if (fs_sweep.empty()) throw ConfigError("fs sweep empty");
  for (int fs : fs_sweep) {
    if (fs <= 0 || fs % 2 != 0)
      throw ConfigError("fs sweep values must be positive and even");
  }
  if (mu_sweep_fs <= 0) throw ConfigError("mu_sweep_fs must be positive");
}

std::string RunConfig::to_json() const {
  nlohmann::json doc = {{"topology", topology_path},
                        {"von_count", von_count},
                        {"slots", slots},
                        {"fs_per_vlink", fs_sweep},
                        {"threshold_mu", threshold_mu},
                        {"mu_sweep", mu_sweep},
                        {"mu_sweep_fs", mu_sweep_fs},
                        {"vcat_mode", vcat_mode},
                        {"guard_fs", guard_fs},
                        {"fs_total", fs_total},
                        {"seed", seed},
                        {"replications", replications},
                        {"k_paths", k_paths},
                        {"embed_retries", embed_retries}};
  return doc.dump(1);
}

SweepKind parse_sweep(const std::string& s) {
  if (s == "fs") return SweepKind::Fs;
  if (s == "mu") return SweepKind::Mu;
  throw ConfigError("unknown sweep: " + s);
}

RunMode parse_mode(const std::string& s) {
  if (s == "st") return RunMode::St;
  if (s == "nonst") return RunMode::NonSt;
  if (s == "both") return RunMode::Both;
  throw ConfigError("unknown mode: " + s);
}

namespace {

Credit mu_to_micro(double mu) {
  return static_cast<Credit>(std::llround(mu * kCreditScale));
}

SimResult simulate_non_st(const std::vector<Von>& vons,
                          const DemandMatrix& demands, int slots) {
  SimResult r;
  auto links = collect_links(vons);
  for (const VirtualLink* vl : links) {
    double cap = vl->capacity_gbps();
    for (int t = 0; t < slots; ++t) {
      double offered = demands[vl->id][t];
      r.offered += offered;
      r.carried += std::min(offered, cap);
    }
  }
  r.ledger_sum = 0;
  return r;
}

SimResult simulate_st(const Topology& topo, SpectrumGrid& grid,
                      const std::vector<Von>& vons,
                      const DemandMatrix& demands, int slots, Credit mu,
                      bool vcat) {
  SimResult r;
  r.ledger_sum = 0;  // any nonzero per-slot sum below overrides
  uint64_t violations_before = grid.violation_count();
  ProtocolDriver driver(topo, grid, vons, mu, vcat);
  for (int t = 0; t < slots; ++t) {
    std::vector<Trade> trades = driver.run_slot_protocol(demands, t);
    r.trades += static_cast<int>(trades.size());
    auto results = driver.settle_slot(demands, t);
    for (const VlinkSlotResult& res : results) {
      r.offered += res.offered;
      r.carried += res.carried;
    }
    driver.commit_block(t);
    driver.end_slot();
    if (Credit s = driver.ledger().sum(); s != 0) r.ledger_sum = s;
  }
  r.chain_blocks = static_cast<int>(driver.chain().blocks().size());
  r.chain_bytes = driver.chain().encode();
  r.grid_violations = grid.violation_count() - violations_before;
  return r;
}

}  // namespace

RepOutcome run_replication(const Topology& topo, const RunConfig& cfg,
                           int fs_per_vlink, double mu, int replication,
                           RunMode mode, uint64_t point_key) {
  RepOutcome rep;
  rep.replication = replication;
  rep.seed = derive_seed(cfg.seed, "replication", point_key,
                         static_cast<uint64_t>(replication));

  SpectrumGrid grid(topo.link_count(), cfg.fs_total);
  EmbedAllResult embedded = embed_all(
      derive_seed(rep.seed, "embed"), topo, grid, cfg.von_count, fs_per_vlink,
      cfg.guard_fs, cfg.k_paths, cfg.embed_retries);
  rep.embed_retries = embedded.retries;
  if (!embedded.ok) {
    rep.feasible = false;
    return rep;
  }
  Rng demand_rng = substream(rep.seed, "demand");
  DemandMatrix demands = generate_demands(demand_rng, embedded.vons, cfg.slots);

  if (mode != RunMode::St)
    rep.non_st = simulate_non_st(embedded.vons, demands, cfg.slots);
  if (mode != RunMode::NonSt)
    rep.st = simulate_st(topo, grid, embedded.vons, demands, cfg.slots,
                         mu_to_micro(mu), cfg.vcat_mode);
  if (mode == RunMode::Both && rep.non_st.carried > 0.0) {
    rep.improvement_pct =
        (rep.st.carried - rep.non_st.carried) / rep.non_st.carried * 100.0;
  }
  return rep;
}

Report run_experiment(const RunConfig& cfg, SweepKind sweep, RunMode mode) {
  Topology topo = Topology::load_file(cfg.topology_path);
  Report report;
  report.config = cfg;
  report.sweep = sweep;
  report.mode = mode;

  struct Point {
    double value;
    int fs;
    double mu;
  };
  std::vector<Point> points;
  if (sweep == SweepKind::Fs) {
    for (int fs : cfg.fs_sweep)
      points.push_back({static_cast<double>(fs), fs, cfg.threshold_mu});
  } else {
    for (double mu : cfg.mu_sweep) points.push_back({mu, cfg.mu_sweep_fs, mu});
  }

  for (const Point& p : points) {
    PointOutcome point;
    point.sweep_value = p.value;
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < cfg.replications; ++rep) {
      // The substream key carries the point value, so adding sweep points
      // never perturbs existing ones.
      uint64_t point_key =
          sweep == SweepKind::Fs
              ? static_cast<uint64_t>(p.fs)
              : 0x1000000000000000ULL + static_cast<uint64_t>(p.fs) +
                    static_cast<uint64_t>(std::llround(-p.mu * 1000.0)) * 64;
      RepOutcome out =
          run_replication(topo, cfg, p.fs, p.mu, rep, mode, point_key);
      if (out.feasible) {
        ++point.feasible_reps;
        sum += out.improvement_pct;
        lo = std::min(lo, out.improvement_pct);
        hi = std::max(hi, out.improvement_pct);
      }
      point.reps.push_back(std::move(out));
    }
    if (point.feasible_reps > 0) {
      point.mean_improvement_pct = sum / point.feasible_reps;
      point.min_improvement_pct = lo;
      point.max_improvement_pct = hi;
    }
    report.points.push_back(std::move(point));
  }
  return report;
}

void write_csv(const Report& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "sweep,point,replication,seed,mode,offered_gbps,carried_gbps,"
         "improvement_pct,embed_retries,feasible,chain_blocks,trades\n";
  const char* sweep_name = report.sweep == SweepKind::Fs ? "fs" : "mu";
  auto row = [&](const PointOutcome& p, const RepOutcome& r, const char* mode,
                 const SimResult& s) {
    out << sweep_name << ',' << p.sweep_value << ',' << r.replication << ','
        << r.seed << ',' << mode << ',' << s.offered << ',' << s.carried << ','
        << r.improvement_pct << ',' << r.embed_retries << ','
        << (r.feasible ? 1 : 0) << ',' << s.chain_blocks << ',' << s.trades
        << '\n';
  };
  for (const PointOutcome& p : report.points) {
    for (const RepOutcome& r : p.reps) {
      if (report.mode != RunMode::St) row(p, r, "non-ST", r.non_st);
      if (report.mode != RunMode::NonSt) row(p, r, "ST", r.st);
    }
  }
}

void write_json(const Report& report, const std::string& path) {
  nlohmann::json doc;
  doc["config"] = nlohmann::json::parse(report.config.to_json());
  doc["sweep"] = report.sweep == SweepKind::Fs ? "fs" : "mu";
  doc["mode"] = report.mode == RunMode::Both
                    ? "both"
                    : (report.mode == RunMode::St ? "st" : "nonst");
  doc["assumptions"] = {
      "virtual topologies are connected graphs",
      "requesting sessions are serialized sequentially per slot",
  };
  doc["points"] = nlohmann::json::array();
  for (const PointOutcome& p : report.points) {
    nlohmann::json jp;
    jp["sweep_value"] = p.sweep_value;
    jp["feasible_replications"] = p.feasible_reps;
    jp["mean_improvement_pct"] = p.mean_improvement_pct;
    jp["min_improvement_pct"] = p.min_improvement_pct;
    jp["max_improvement_pct"] = p.max_improvement_pct;
    jp["replications"] = nlohmann::json::array();
    for (const RepOutcome& r : p.reps) {
      jp["replications"].push_back(
          {{"replication", r.replication},
           {"seed", r.seed},
           {"feasible", r.feasible},
           {"embed_retries", r.embed_retries},
           {"improvement_pct", r.improvement_pct},
           {"offered_gbps", r.st.offered > 0 ? r.st.offered : r.non_st.offered},
           {"carried_st_gbps", r.st.carried},
           {"carried_nonst_gbps", r.non_st.carried},
           {"chain_blocks", r.st.chain_blocks},
           {"trades", r.st.trades}});
    }
    doc["points"].push_back(std::move(jp));
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << doc.dump(1) << '\n';
}

}  // namespace stsim
