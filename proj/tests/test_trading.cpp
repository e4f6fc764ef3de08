// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "core/trading.hpp"
#include "scenario.hpp"

using namespace stsim;
using testutil::make_tri_scenario;

namespace {

constexpr Credit kMu = -30 * kCreditScale;

}  // namespace

TEST_CASE("contribution credit sums slots weighted by link length") {
  auto s = make_tri_scenario();
  Contribution both{0, {{1, {2}}, {2, {2}}}};
  CHECK(credit_of(both, s.topo) == 1'400'000);
  CHECK(credit_of({0, {}}, s.topo) == 0);
  Contribution two_on_longest{1, {{0, {1, 2}}}};
  CHECK(credit_of(two_on_longest, s.topo) == 2'000'000);
  Contribution four{0, {{1, {0, 1}}, {2, {0, 1}}}};
  CHECK(credit_of(four, s.topo) == 2'800'000);
}

TEST_CASE("ledger transfers conserve the total and gate strictly below mu") {
  CreditLedger ledger(3, kMu);
  CHECK(ledger.sum() == 0);
  ledger.transfer(1, 0, 5 * kCreditScale);
  CHECK(ledger.balance(0) == 5 * kCreditScale);
  CHECK(ledger.balance(1) == -5 * kCreditScale);
  CHECK(ledger.sum() == 0);

  ledger.transfer(1, 2, 25 * kCreditScale);
  CHECK(ledger.balance(1) == -30 * kCreditScale);
  CHECK(ledger.may_request(1));  // boundary is inclusive
  ledger.transfer(1, 2, 1);
  CHECK(!ledger.may_request(1));  // one micro-credit below
  ledger.transfer(2, 1, 1);
  CHECK(ledger.may_request(1));
  CHECK(ledger.sum() == 0);
}

TEST_CASE("role classification on the triangle scenario") {
  auto s = make_tri_scenario();
  TradingEngine engine(s.topo, *s.grid, s.vons, kMu, true);
  Roles roles = engine.classify_roles(s.demands, 0);

  REQUIRE(roles.rc_order.size() == 1);
  CHECK(roles.rc_order[0].von == 1);
  CHECK(roles.rc_order[0].vlink == 2);
  CHECK(roles.rc_order[0].deficit == 1);
  CHECK(roles.gated == std::vector<char>{0, 0});

  CHECK(roles.offers[0].empty());
  REQUIRE(roles.offers[1].size() == 2);  // A-C: surplus FSs 1 and 2
  CHECK(roles.offers[1][0].fs == 1);
  CHECK(roles.offers[1][1].fs == 2);
  CHECK(roles.offers[1][0].von == 0);
  REQUIRE(roles.offers[2].size() == 1);  // B-C: surplus FS 2
  CHECK(roles.offers[2][0].fs == 2);
}

TEST_CASE("triangle trade transfers 1.4 credits and clears the blocking") {
  for (bool vcat : {false, true}) {
    CAPTURE(vcat);
    auto s = make_tri_scenario();
    TradingEngine engine(s.topo, *s.grid, s.vons, kMu, vcat);
    Roles roles = engine.classify_roles(s.demands, 0);
    auto trades = engine.select_trades(roles, 0);

    REQUIRE(trades.size() == 1);
    const Trade& t = trades[0];
    CHECK(t.rc == 1);
    CHECK(t.rc_vlink == 2);
    CHECK(t.credit_delta == 1'400'000);
    REQUIRE(t.contributions.size() == 1);
    CHECK(t.contributions[0].tc == 0);
    REQUIRE(t.contributions[0].grants.size() == 2);
    CHECK(t.contributions[0].grants[0] ==
          std::pair<int, std::vector<int>>{1, {1}});
    CHECK(t.contributions[0].grants[1] ==
          std::pair<int, std::vector<int>>{2, {2}});

    CHECK(engine.ledger().balance(0) == 1'400'000);
    CHECK(engine.ledger().balance(1) == -1'400'000);
    CHECK(engine.ledger().sum() == 0);

    CHECK(s.grid->cell(1, 1).state == Ownership::Loaned);
    CHECK(s.grid->cell(1, 1).owner == 0);
    CHECK(s.grid->cell(1, 1).borrower == 1);
    CHECK(s.grid->cell(2, 2).state == Ownership::Loaned);
    CHECK(!s.grid->audit());

    auto results = engine.settle_slot(s.demands, 0);
    CHECK(results[2].carried == 200.0);
    CHECK(results[2].blocked == 0.0);
    CHECK(results[2].traded_fs_used == 1);
    CHECK(results[0].carried == 70.0);
    CHECK(results[1].carried == 150.0);

    engine.release_slot();
    CHECK(s.grid->loaned_cell_count() == 0);
    CHECK(!s.grid->audit());
    CHECK(engine.ledger().balance(0) == 1'400'000);  // credit persists
    CHECK(engine.acquired_count(2) == 0);
  }
}

TEST_CASE("lowest-credit contributors are consumed first") {
  auto s = testutil::make_line_scenario(false);
  TradingEngine engine(s.topo, *s.grid, s.vons, kMu, true);
  // von0 at +5, von1 at -2 before classification
  engine.ledger().transfer(2, 0, 5 * kCreditScale);
  engine.ledger().transfer(1, 2, 2 * kCreditScale);

  Roles roles = engine.classify_roles(s.demands, 0);
  REQUIRE(roles.offers[0].size() == 3);
  CHECK(roles.offers[0][0].von == 1);  // credit -2 sorts first
  CHECK(roles.offers[0][0].fs == 5);
  CHECK(roles.offers[0][1].von == 0);
  CHECK(roles.offers[0][1].fs == 1);
  CHECK(roles.offers[0][2].fs == 2);

  auto trades = engine.select_trades(roles, 0);
  REQUIRE(trades.size() == 1);
  REQUIRE(trades[0].contributions.size() == 2);  // ascending tc id
  CHECK(trades[0].contributions[0].tc == 0);
  CHECK(trades[0].contributions[0].grants[0].second == std::vector<int>{1});
  CHECK(trades[0].contributions[1].tc == 1);
  CHECK(trades[0].contributions[1].grants[0].second == std::vector<int>{5});
  CHECK(trades[0].credit_delta == 2 * kCreditScale);
  CHECK(engine.ledger().sum() == 0);
}

TEST_CASE("a requester uses its own surplus first, at zero credit") {
  auto s = testutil::make_line_scenario(true);
  TradingEngine engine(s.topo, *s.grid, s.vons, kMu, true);
  engine.ledger().transfer(2, 0, 5 * kCreditScale);
  engine.ledger().transfer(1, 2, 2 * kCreditScale);

  Roles roles = engine.classify_roles(s.demands, 0);
  auto trades = engine.select_trades(roles, 0);

  // deficit 2 = own FS 10 (free) + von1's FS 5 (cheapest market entry)
  CHECK(s.grid->cell(0, 10).state == Ownership::Loaned);
  CHECK(s.grid->cell(0, 10).owner == 2);
  CHECK(s.grid->cell(0, 10).borrower == 2);
  CHECK(s.grid->cell(0, 5).state == Ownership::Loaned);
  CHECK(s.grid->cell(0, 5).borrower == 2);
  CHECK(s.grid->cell(0, 1).state == Ownership::Owned);

  REQUIRE(trades.size() == 1);
  CHECK(trades[0].credit_delta == 1 * kCreditScale);
  REQUIRE(trades[0].contributions.size() == 1);
  CHECK(trades[0].contributions[0].tc == 1);  // self-use is not a trade record

  bool saw_self = false;
  for (const LoanRec& l : engine.active_loans())
    if (l.owner_von == 2 && l.borrower_von == 2) {
      saw_self = true;
      CHECK(l.credit_micro == 0);
    }
  CHECK(saw_self);
  CHECK(engine.acquired_count(2) == 2);
}

TEST_CASE("vons below the threshold cannot request until re-admitted") {
  auto s = testutil::make_line_scenario(false);
  TradingEngine engine(s.topo, *s.grid, s.vons, kMu, true);
  engine.ledger().transfer(2, 0, 40 * kCreditScale);  // von2 at -40 < mu

  Roles gated = engine.classify_roles(s.demands, 0);
  CHECK(gated.rc_order.empty());
  CHECK(gated.gated[2] == 1);
  auto trades = engine.select_trades(gated, 0);
  CHECK(trades.empty());
  engine.release_slot();

  engine.ledger().transfer(0, 2, 10 * kCreditScale);  // back to -30 == mu
  Roles open = engine.classify_roles(s.demands, 0);
  CHECK(open.gated[2] == 0);
  REQUIRE(open.rc_order.size() == 1);
  CHECK(open.rc_order[0].von == 2);
}

TEST_CASE("requests are served in descending credit order") {
  Topology topo = Topology::load_text(R"({
    "nodes":[{"id":0,"name":"A"},{"id":1,"name":"B"}],
    "links":[{"id":0,"a":0,"b":1,"length_km":1000}]})");
  SpectrumGrid grid(1, 20);
  const Modulation* qpsk = &select_modulation(1500.0);
  std::vector<Von> vons;
  for (int v = 0; v < 4; ++v) {
    Von von{v, {0, 1}, {}};
    von.links.push_back({v, v, 0, 1, {0}, qpsk, {3 * v, 3 * v + 1, 3 * v + 2}});
    for (int fs : von.links[0].assigned_fs) grid.occupy(0, fs, v);
    vons.push_back(std::move(von));
  }
  DemandMatrix demands(4, {200.0});  // every pipe one FS short
  TradingEngine engine(topo, grid, vons, kMu, true);
  engine.ledger().transfer(0, 2, 3 * kCreditScale);  // credits -3,0,3,0
  Roles roles = engine.classify_roles(demands, 0);
  REQUIRE(roles.rc_order.size() == 4);
  CHECK(roles.rc_order[0].von == 2);  // +3
  CHECK(roles.rc_order[1].von == 1);  // 0, lower id first
  CHECK(roles.rc_order[2].von == 3);  // 0
  CHECK(roles.rc_order[3].von == 0);  // -3

  // sort-oracle: order is the argsort of (-credit, von)
  std::vector<int> want{0, 1, 2, 3};
  std::sort(want.begin(), want.end(), [&](int x, int y) {
    if (roles.credit_snapshot[x] != roles.credit_snapshot[y])
      return roles.credit_snapshot[x] > roles.credit_snapshot[y];
    return x < y;
  });
  for (size_t i = 0; i < want.size(); ++i)
    CHECK(roles.rc_order[i].von == want[i]);
}

TEST_CASE("a reclaim reverses the loan, the credit, and the trade record") {
  auto s = testutil::make_line_scenario(false);
  TradingEngine engine(s.topo, *s.grid, s.vons, kMu, true);
  engine.ledger().transfer(2, 0, 5 * kCreditScale);
  engine.ledger().transfer(1, 2, 2 * kCreditScale);
  Roles roles = engine.classify_roles(s.demands, 0);
  auto trades = engine.select_trades(roles, 0);
  REQUIRE(engine.acquired_count(2) == 2);
  Credit von1_before = engine.ledger().balance(1);

  // von1 reclaims its lent FS 5; the shortfall refills from von0's FS 2
  engine.reclaim(1, 1, roles, 0, trades);

  CHECK(s.grid->cell(0, 5).state == Ownership::Owned);
  CHECK(s.grid->cell(0, 5).owner == 1);
  CHECK(s.grid->cell(0, 2).state == Ownership::Loaned);
  CHECK(s.grid->cell(0, 2).borrower == 2);
  CHECK(engine.acquired_count(2) == 2);
  CHECK(engine.ledger().balance(1) == von1_before - 1 * kCreditScale);
  CHECK(engine.ledger().sum() == 0);

  // surviving record equals the run where von1 never lent
  REQUIRE(trades.size() == 1);
  REQUIRE(trades[0].contributions.size() == 1);
  CHECK(trades[0].contributions[0].tc == 0);
  CHECK(trades[0].contributions[0].grants[0].second ==
        std::vector<int>{1, 2});
  CHECK(trades[0].credit_delta == 2 * kCreditScale);
  CHECK(!s.grid->audit());
}

TEST_CASE("reclaim with an empty market leaves the borrower short") {
  auto s = make_tri_scenario();
  TradingEngine engine(s.topo, *s.grid, s.vons, kMu, true);
  Roles roles = engine.classify_roles(s.demands, 0);
  auto trades = engine.select_trades(roles, 0);
  REQUIRE(trades.size() == 1);

  // vlink 1 was the only lender on B-C; nothing can replace it
  engine.reclaim(0, 1, roles, 0, trades);
  CHECK(s.grid->cell(2, 2).state == Ownership::Owned);
  CHECK(engine.acquired_count(2) == 0);
  CHECK(engine.ledger().balance(1) == -600'000);  // A-C grant still paid
  auto results = engine.settle_slot(s.demands, 0);
  CHECK(results[2].carried == 150.0);
  CHECK(engine.ledger().sum() == 0);
}

TEST_CASE("multi-slot random runs keep the invariants") {
  std::string path = std::string(STSIM_DATA_DIR) + "/usnet.json";
  Topology topo = Topology::load_file(path);
  for (uint64_t seed : {11u, 22u, 33u}) {
    SpectrumGrid grid(topo.link_count(), 600);
    EmbedAllResult emb = embed_all(seed, topo, grid, 8, 4, 0, 3, 50);
    REQUIRE(emb.ok);
    Rng rng(derive_seed(seed, "demand", 0, 0, 0));
    DemandMatrix demands = generate_demands(rng, emb.vons, 4);
    TradingEngine engine(topo, grid, emb.vons, kMu, true);
    auto vlinks = engine.vlinks();

    for (int slot = 0; slot < 4; ++slot) {
      Roles roles = engine.classify_roles(demands, slot);
      for (const RcRequest& req : roles.rc_order)
        CHECK(!roles.gated[req.von]);
      auto trades = engine.select_trades(roles, slot);

      CHECK(engine.ledger().sum() == 0);
      CHECK(!grid.audit());
      for (const Trade& t : trades) {
        CHECK(t.slot == slot);
        Credit sum = 0;
        for (size_t i = 0; i < t.contributions.size(); ++i) {
          if (i > 0) CHECK(t.contributions[i - 1].tc < t.contributions[i].tc);
          sum += credit_of(t.contributions[i], topo);
        }
        CHECK(sum == t.credit_delta);
      }
      // acquired width never exceeds the deficit
      for (const RcRequest& req : roles.rc_order) {
        CHECK(engine.acquired_count(req.vlink) <= req.deficit);
        // uniform width: every route link of the borrower carries the
        // same number of loans to it
        std::map<int, int> per_link;
        for (const LoanRec& l : engine.active_loans())
          if (l.borrower_vlink == req.vlink) per_link[l.link] += 1;
        if (!per_link.empty()) {
          CHECK(static_cast<int>(per_link.size()) ==
                static_cast<int>(vlinks[req.vlink]->route.size()));
          for (const auto& [link, n] : per_link)
            CHECK(n == engine.acquired_count(req.vlink));
        }
      }
      engine.release_slot();
      CHECK(grid.loaned_cell_count() == 0);
    }
  }
}
