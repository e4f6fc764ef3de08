// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "core/chain.hpp"
#include "core/trading.hpp"

namespace stsim {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MsgKind {
  TradeRequest,
  TradeOffer,
  TradeCommit,
  TradeAck,
  ReleaseNotice,
  ReclaimNotice,
  BlockAnnounce,
  BlockConfirm,
};

const char* msg_kind_name(MsgKind k);

// Payloads carry von ids, link ids, and FS index sets only.
struct Message {
  uint64_t seq;  // bus-assigned, total order
  MsgKind kind;
  int sender;
  int recipient;  // -1 = broadcast
  nlohmann::json payload;
};

// Deterministic FIFO bus. Every delivered message is also appended to the
// trace, so a run can be replayed and inspected offline.
class SimBus {
 public:
  uint64_t post(MsgKind kind, int sender, int recipient,
                nlohmann::json payload);
  const std::vector<Message>& trace() const { return trace_; }
  std::string trace_jsonl() const;

 private:
  uint64_t next_seq_ = 0;
  std::vector<Message> trace_;
};

enum class Phase { Idle, Requesting, Offering, Committing };

// One VON client. Holds its local ledger view, its chain replica, and its
// remaining offer availability; grants only what it offered.
struct ClientActor {
  int von_id = -1;
  Phase phase = Phase::Idle;
  std::vector<Credit> ledger_view;
  Chain chain;
  std::vector<std::vector<Trade>> trade_log;  // per slot, observed commits
  // own outstanding offers: link -> entries (mirrors Roles::offers subset)
  std::vector<std::vector<LinkOffer>> own_offers;
};

// Cooperative scheduler that drives actor sessions over the bus. The
// engine's spectrum grid and ledger remain the single source of physical
// state; actors exchange only ids and indices.
class ProtocolDriver {
 public:
  ProtocolDriver(const Topology& topo, SpectrumGrid& grid,
                 const std::vector<Von>& vons, Credit threshold_mu,
                 bool vcat_mode);

  // Full Request -> Offer -> Commit -> Ack cycle per requesting virtual
  // link, sequentially in descending-credit order. Returns the slot's
  // trades; the message trace accumulates on the bus.
  std::vector<Trade> run_slot_protocol(const DemandMatrix& demands, int slot);

  // ReclaimNotice, forced release, and shortfall re-requests.
  void run_reclaim_protocol(int tc_von, int tc_vlink, int slot);

  // PoC block for the slot's surviving trades; announce, verify at every
  // actor, commit or reject chain-wide. Returns true when committed.
  bool commit_block(int slot);

  // Slot end: ReleaseNotice + loan release.
  void end_slot();

  const CreditLedger& ledger() const { return engine_.ledger(); }
  TradingEngine& engine() { return engine_; }
  const SimBus& bus() const { return bus_; }
  const std::vector<ClientActor>& actors() const { return actors_; }
  const Chain& chain() const { return actors_.front().chain; }
  const std::vector<std::vector<Trade>>& trade_log() const {
    return trade_log_;
  }
  std::vector<VlinkSlotResult> settle_slot(const DemandMatrix& demands,
                                           int slot) {
    return engine_.settle_slot(demands, slot);
  }

 private:
  void run_session(const RcRequest& req, int slot);

  const Topology& topo_;
  const std::vector<Von>& vons_;
  TradingEngine engine_;
  bool vcat_mode_;
  SimBus bus_;
  std::vector<ClientActor> actors_;
  Roles roles_;
  std::vector<Trade> slot_trades_;
  std::vector<std::vector<Trade>> trade_log_;
  int current_slot_ = -1;
};

}  // namespace stsim
