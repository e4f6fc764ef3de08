// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "core/spectrum.hpp"
#include "core/topology.hpp"
#include "core/traffic.hpp"
#include "core/von.hpp"

namespace stsim {

// Credits are fixed-point integers in units of 1e-6 credit, so the
// zero-sum invariant holds exactly.
using Credit = int64_t;
inline constexpr Credit kCreditScale = 1'000'000;

inline double credit_to_double(Credit c) {
  return static_cast<double>(c) / kCreditScale;
}

class CreditLedger {
 public:
  CreditLedger(int von_count, Credit threshold_mu)
      : balance_(von_count, 0), mu_(threshold_mu) {}

  Credit balance(int von) const { return balance_.at(von); }
  Credit threshold_mu() const { return mu_; }
  void transfer(int from, int to, Credit amount) {
    balance_.at(from) -= amount;
    balance_.at(to) += amount;
  }
  // Forbidden iff balance < mu (strictly smaller).
  bool may_request(int von) const { return balance_.at(von) >= mu_; }
  Credit sum() const {
    Credit s = 0;
    for (Credit c : balance_) s += c;
    return s;
  }
  int size() const { return static_cast<int>(balance_.size()); }

 private:
  std::vector<Credit> balance_;
  Credit mu_;
};

struct RcRequest {
  int von;
  int vlink;
  int deficit;
};

// One loanable FS on one physical link, offered by a surplus virtual link.
struct LinkOffer {
  int fs;
  int von;
  int vlink;
  Credit credit;  // lender's cumulative credit at classification time
  bool used = false;
};

struct Roles {
  std::vector<RcRequest> rc_order;  // descending credit, then von, vlink
  // offers[link id], sorted by (credit, von, fs)
  std::vector<std::vector<LinkOffer>> offers;
  std::vector<Credit> credit_snapshot;
  std::vector<char> gated;  // vons barred from requesting this slot
};

// Grants of one target client within one trade: link -> sorted FS indices.
struct Contribution {
  int tc;
  std::vector<std::pair<int, std::vector<int>>> grants;
};

struct Trade {
  int slot;
  int rc;
  int rc_vlink;
  std::vector<Contribution> contributions;  // ascending tc id
  Credit credit_delta;                      // paid by the RC
};

struct LoanRec {
  int link;
  int fs;
  int owner_von;
  int owner_vlink;
  int borrower_von;
  int borrower_vlink;
  Credit credit_micro;  // 0 for self-use
};

// C = sum over links of S_i * l_i for one TC's grants.
Credit credit_of(const Contribution& contribution, const Topology& topo);

// Candidate entries for one route link of one requesting virtual link:
// the RC's own unused offers first (self-use, zero credit), then market
// offers by (credit asc, von asc, fs asc). With vcat off, market entries
// must extend the RC's contiguous block through offered indices.
std::vector<LinkOffer*> eligible_offers(std::vector<LinkOffer>& pool,
                                        int rc_von,
                                        const std::vector<int>& rc_block,
                                        bool vcat_mode);

// Shared fill rule: t = min(deficit, min over links of pool size); take
// the first t entries of every link's candidate list.
struct FillResult {
  int t = 0;
  std::vector<std::vector<LinkOffer*>> chosen;  // per route link
};
FillResult fill_request(int deficit,
                        std::vector<std::vector<LinkOffer*>>& candidates);

// Merge market grants of one fill into the slot's trade list, one Trade
// per (RC virtual link, slot), contributions ascending by tc, grants by
// link, FS indices sorted. Returns the RC's total payment.
using GrantsByTc = std::map<int, std::map<int, std::vector<int>>>;
Credit record_market_grants(std::vector<Trade>& trades, int slot, int rc,
                            int rc_vlink, const GrantsByTc& grants_by_tc,
                            const Topology& topo);

// Remove one reverted grant from the trade list; empty contributions and
// trades disappear.
void excise_grant(std::vector<Trade>& trades, int slot, int rc_vlink, int tc,
                  int link, int fs, Credit l_micro);

// Centralized trading state machine for one simulation run.
class TradingEngine {
 public:
  TradingEngine(const Topology& topo, SpectrumGrid& grid,
                const std::vector<Von>& vons, Credit threshold_mu,
                bool vcat_mode);

  Roles classify_roles(const DemandMatrix& demands, int slot) const;

  std::vector<Trade> select_trades(Roles& roles, int slot);

  // Fill one request against the current pools and apply the outcome.
  // Returns the number of FSs acquired; merges into `trades`.
  int fill_and_apply(const RcRequest& req, Roles& roles, int slot,
                     std::vector<Trade>& trades);

  // Apply an externally decided choice (the distributed protocol's):
  // marks the matching pool entries used, loans the cells, moves credit,
  // and records the trade.
  void apply_choice(const RcRequest& req, Roles& roles,
                    const std::vector<std::vector<LinkOffer>>& chosen,
                    int slot, std::vector<Trade>& trades);

  // Reclaim without the re-request phase: reverts loans and credit,
  // withdraws the lender's offers, excises trade records. Returns the
  // shortfall per affected borrower vlink.
  std::map<int, int> reclaim_release(int tc_von, int tc_vlink, Roles& roles,
                                     int slot, std::vector<Trade>& trades);

  // Mid-slot reclaim by a lender vlink: loans revert, credit reverses,
  // the lender's remaining offers leave the market, and affected RCs
  // re-request their shortfall against the remaining pools.
  void reclaim(int tc_von, int tc_vlink, Roles& roles, int slot,
               std::vector<Trade>& trades);

  // Slot end: every loan reverts to its owner; no credit change.
  void release_slot();

  std::vector<VlinkSlotResult> settle_slot(const DemandMatrix& demands,
                                           int slot) const;

  const CreditLedger& ledger() const { return ledger_; }
  CreditLedger& ledger() { return ledger_; }
  const std::vector<LoanRec>& active_loans() const { return loans_; }
  const std::vector<const VirtualLink*>& vlinks() const { return vlinks_; }
  int acquired_count(int vlink) const;

 private:

  const Topology& topo_;
  SpectrumGrid& grid_;
  const std::vector<Von>& vons_;
  std::vector<const VirtualLink*> vlinks_;
  CreditLedger ledger_;
  bool vcat_;
  std::vector<LoanRec> loans_;
  std::map<int, int> acquired_;  // vlink -> FSs acquired this slot
};

}  // namespace stsim
