// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/traffic.hpp"
#include "scenario.hpp"

using namespace stsim;

TEST_CASE("fs_needed rounds offered load up to whole slots") {
  const Modulation& qpsk = kModulations[1];
  const Modulation& qam8 = kModulations[0];
  CHECK(fs_needed(170.0, qpsk) == 4);
  CHECK(fs_needed(200.0, qpsk) == 4);  // exact multiple
  CHECK(fs_needed(200.1, qpsk) == 5);
  CHECK(fs_needed(75.0, qam8) == 1);
  CHECK(fs_needed(0.0, qpsk) == 0);
  CHECK(fs_needed(-5.0, qpsk) == 0);
  CHECK(fs_needed(0.001, qpsk) == 1);
}

TEST_CASE("demands stay inside [10, 2X-10] per virtual link") {
  auto s = testutil::make_tri_scenario();
  Rng rng(5);
  DemandMatrix d = generate_demands(rng, s.vons, 200);
  REQUIRE(d.size() == 3);
  // capacities: 225, 225, 150 Gb/s
  const double hi[3] = {440.0, 440.0, 290.0};
  for (size_t vl = 0; vl < d.size(); ++vl) {
    REQUIRE(d[vl].size() == 200);
    for (double x : d[vl]) {
      CHECK(x >= 10.0);
      CHECK(x < hi[vl]);
    }
  }
}

TEST_CASE("demand draws average to the link capacity") {
  auto s = testutil::make_tri_scenario();
  Rng rng(17);
  DemandMatrix d = generate_demands(rng, s.vons, 100000);
  double sum = 0.0;
  for (double x : d[2]) sum += x;
  double mean = sum / d[2].size();
  // uniform on [10, 290] has mean 150 = the vlink capacity
  CHECK(mean == doctest::Approx(150.0).epsilon(0.02));
}

TEST_CASE("demand generation is deterministic and order-stable") {
  auto s = testutil::make_tri_scenario();
  Rng a(123), b(123);
  DemandMatrix da = generate_demands(a, s.vons, 7);
  DemandMatrix db = generate_demands(b, s.vons, 7);
  CHECK(da == db);

  // draws happen vlink-major, slot-minor
  Rng c(123);
  for (size_t vl = 0; vl < da.size(); ++vl) {
    double x = s.vons[vl < 2 ? 0 : 1].links[vl < 2 ? vl : 0].capacity_gbps();
    for (int t = 0; t < 7; ++t)
      CHECK(da[vl][t] == c.uniform_real(10.0, 2.0 * x - 10.0));
  }
}

TEST_CASE("settlement without trading blocks a quarter of the two-hop pipe") {
  auto s = testutil::make_tri_scenario();
  TradingEngine engine(s.topo, *s.grid, s.vons, -30 * kCreditScale, true);
  auto results = engine.settle_slot(s.demands, 0);
  REQUIRE(results.size() == 3);
  CHECK(results[0].carried == 70.0);
  CHECK(results[0].blocked == 0.0);
  CHECK(results[1].carried == 150.0);
  CHECK(results[2].offered == 200.0);
  CHECK(results[2].carried == 150.0);
  CHECK(results[2].blocked == 50.0);
  CHECK(results[2].blocked / results[2].offered == 0.25);
}

TEST_CASE("offered equals carried plus blocked in every settlement") {
  auto s = testutil::make_tri_scenario(4);
  Rng rng(9);
  DemandMatrix d = generate_demands(rng, s.vons, 4);
  TradingEngine engine(s.topo, *s.grid, s.vons, -30 * kCreditScale, true);
  for (int slot = 0; slot < 4; ++slot) {
    Roles roles = engine.classify_roles(d, slot);
    auto trades = engine.select_trades(roles, slot);
    for (const auto& r : engine.settle_slot(d, slot)) {
      CHECK(r.offered == r.carried + r.blocked);
      CHECK(r.carried >= 0.0);
      CHECK(r.blocked >= 0.0);
    }
    engine.release_slot();
  }
}
