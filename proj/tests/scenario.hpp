// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "core/traffic.hpp"
#include "core/trading.hpp"
#include "core/von.hpp"

namespace stsim::testutil {

// Three-node reference scenario used across suites.
//
// Triangle A(0), B(1), C(2); links 0:A-B 1000 km, 1:A-C 600 km,
// 2:B-C 800 km, so normalized lengths are 1.0, 0.6, 0.8.
//
// VON 0 owns two single-hop pipes, FSs {0,1,2} each:
//   vlink 0 on A-C (8QAM, 75 Gb/s per FS)
//   vlink 1 on B-C (8QAM)
// VON 1 owns one two-hop pipe A-C-B, FSs {3,4,5}:
//   vlink 2 (1400 km, QPSK, 50 Gb/s per FS)
//
// With one slot of demands {70, 150, 200} Gb/s the needs are 1, 2 and 4
// FSs: VON 0 has surplus 2 on A-C and 1 on B-C, VON 1 is one FS short.
// Without trading 50 of 200 Gb/s on vlink 2 is blocked (25%); with
// trading the deficit fills from VON 0 for 1.4 credits.
struct TriScenario {
  Topology topo;
  std::unique_ptr<SpectrumGrid> grid;
  std::vector<Von> vons;
  DemandMatrix demands;
};

inline TriScenario make_tri_scenario(int slots = 1) {
  TriScenario s{Topology::load_text(R"({
    "nodes":[{"id":0,"name":"A"},{"id":1,"name":"B"},{"id":2,"name":"C"}],
    "links":[{"id":0,"a":0,"b":1,"length_km":1000},
             {"id":1,"a":0,"b":2,"length_km":600},
             {"id":2,"a":1,"b":2,"length_km":800}]})"),
               nullptr,
               {},
               {}};
  s.grid = std::make_unique<SpectrumGrid>(s.topo.link_count(), 8);

  Von von0{0, {0, 1, 2}, {}};
  von0.links.push_back(
      {0, 0, 0, 2, {1}, &select_modulation(600), {0, 1, 2}});
  von0.links.push_back(
      {1, 0, 1, 2, {2}, &select_modulation(800), {0, 1, 2}});
  Von von1{1, {0, 1}, {}};
  von1.links.push_back(
      {2, 1, 0, 1, {1, 2}, &select_modulation(1400), {3, 4, 5}});
  s.vons = {std::move(von0), std::move(von1)};

  for (const Von& von : s.vons)
    for (const VirtualLink& vl : von.links)
      for (int link : vl.route)
        for (int fs : vl.assigned_fs) s.grid->occupy(link, fs, von.id);

  s.demands = {std::vector<double>(slots, 70.0),
               std::vector<double>(slots, 150.0),
               std::vector<double>(slots, 200.0)};
  return s;
}

// Single 1000 km link shared by three VONs, all pipes QPSK (50 Gb/s per
// FS). One slot of demands: VON 0 needs 1 of 3 FSs (surplus 2), VON 1
// needs 2 of 3 (surplus 1), VON 2's first pipe needs 5 of 3 (deficit 2).
// The optional second VON 2 pipe adds a self-use surplus slot.
struct LineScenario {
  Topology topo;
  std::unique_ptr<SpectrumGrid> grid;
  std::vector<Von> vons;
  DemandMatrix demands;
};

inline LineScenario make_line_scenario(bool with_self_pipe) {
  LineScenario s{Topology::load_text(R"({
    "nodes":[{"id":0,"name":"A"},{"id":1,"name":"B"}],
    "links":[{"id":0,"a":0,"b":1,"length_km":1000}]})"),
                 nullptr,
                 {},
                 {}};
  s.grid = std::make_unique<SpectrumGrid>(1, 12);
  const Modulation* qpsk = &select_modulation(1001.0);

  Von von0{0, {0, 1}, {}};
  von0.links.push_back({0, 0, 0, 1, {0}, qpsk, {0, 1, 2}});
  Von von1{1, {0, 1}, {}};
  von1.links.push_back({1, 1, 0, 1, {0}, qpsk, {3, 4, 5}});
  Von von2{2, {0, 1}, {}};
  von2.links.push_back({2, 2, 0, 1, {0}, qpsk, {6, 7, 8}});
  if (with_self_pipe)
    von2.links.push_back({3, 2, 0, 1, {0}, qpsk, {9, 10}});
  s.vons = {std::move(von0), std::move(von1), std::move(von2)};

  for (const Von& von : s.vons)
    for (const VirtualLink& vl : von.links)
      for (int fs : vl.assigned_fs) s.grid->occupy(0, fs, von.id);

  s.demands = {{50.0}, {100.0}, {240.0}};
  if (with_self_pipe) s.demands.push_back({50.0});
  return s;
}

}  // namespace stsim::testutil
