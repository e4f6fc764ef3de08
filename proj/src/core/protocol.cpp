// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#include "core/protocol.hpp"

#include <algorithm>

namespace stsim {

const char* msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::TradeRequest: return "TradeRequest";
    case MsgKind::TradeOffer: return "TradeOffer";
    case MsgKind::TradeCommit: return "TradeCommit";
    case MsgKind::TradeAck: return "TradeAck";
    case MsgKind::ReleaseNotice: return "ReleaseNotice";
    case MsgKind::ReclaimNotice: return "ReclaimNotice";
    case MsgKind::BlockAnnounce: return "BlockAnnounce";
    case MsgKind::BlockConfirm: return "BlockConfirm";
  }
  return "?";
}

uint64_t SimBus::post(MsgKind kind, int sender, int recipient,
                      nlohmann::json payload) {
  trace_.push_back({next_seq_, kind, sender, recipient, std::move(payload)});
  return next_seq_++;
}

std::string SimBus::trace_jsonl() const {
  std::string out;
  for (const Message& m : trace_) {
    nlohmann::json line = {{"seq", m.seq},
                           {"kind", msg_kind_name(m.kind)},
                           {"sender", m.sender},
                           {"recipient", m.recipient},
                           {"payload", m.payload}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

ProtocolDriver::ProtocolDriver(const Topology& topo, SpectrumGrid& grid,
                               const std::vector<Von>& vons,
                               Credit threshold_mu, bool vcat_mode)
    : topo_(topo),
      vons_(vons),
      engine_(topo, grid, vons, threshold_mu, vcat_mode),
      vcat_mode_(vcat_mode) {
  actors_.resize(vons.size());
  for (size_t i = 0; i < vons.size(); ++i) {
    actors_[i].von_id = static_cast<int>(i);
    actors_[i].ledger_view.assign(vons.size(), 0);
    actors_[i].own_offers.resize(topo.link_count());
  }
}

std::vector<Trade> ProtocolDriver::run_slot_protocol(const DemandMatrix& demands,
                                                     int slot) {
  current_slot_ = slot;
  slot_trades_.clear();
  roles_ = engine_.classify_roles(demands, slot);
  for (ClientActor& a : actors_) {
    a.phase = Phase::Idle;
    for (auto& pool : a.own_offers) pool.clear();
    if (static_cast<int>(a.trade_log.size()) <= slot)
      a.trade_log.resize(slot + 1);
  }
  if (static_cast<int>(trade_log_.size()) <= slot) trade_log_.resize(slot + 1);
  for (int link = 0; link < topo_.link_count(); ++link) {
    for (const LinkOffer& o : roles_.offers[link]) {
      actors_[o.von].own_offers[link].push_back(o);
    }
  }
  for (const RcRequest& req : roles_.rc_order) {
    run_session(req, slot);
  }
  trade_log_[slot] = slot_trades_;
  return slot_trades_;
}

void ProtocolDriver::run_session(const RcRequest& req, int slot) {
  ClientActor& rc = actors_[req.von];
  if (rc.phase != Phase::Idle)
    throw ProtocolError("out-of-phase TradeRequest from von " +
                        std::to_string(req.von));
  rc.phase = Phase::Requesting;
  const VirtualLink* vl = engine_.vlinks()[req.vlink];

  bus_.post(MsgKind::TradeRequest, req.von, -1,
            {{"von", req.von},
             {"vlink", req.vlink},
             {"deficit", req.deficit},
             {"route", vl->route},
             {"own_block", vl->assigned_fs}});

  // Each peer judges its own eligibility and replies with its available
  // entries on the requested route links.
  struct ReceivedOffer {
    int von;
    Credit credit;
    std::vector<std::vector<std::pair<int, int>>> per_link;  // (fs, vlink)
  };
  std::vector<ReceivedOffer> received;
  for (ClientActor& peer : actors_) {
    if (peer.von_id == req.von) continue;
    ReceivedOffer off;
    off.von = peer.von_id;
    off.credit = roles_.credit_snapshot[peer.von_id];
    off.per_link.resize(vl->route.size());
    bool any = false;
    for (size_t li = 0; li < vl->route.size(); ++li) {
      for (const LinkOffer& o : peer.own_offers[vl->route[li]]) {
        if (o.used) continue;
        off.per_link[li].push_back({o.fs, o.vlink});
        any = true;
      }
    }
    if (!any) continue;  // not a CC for this request
    peer.phase = Phase::Offering;
    nlohmann::json links = nlohmann::json::array();
    for (size_t li = 0; li < vl->route.size(); ++li) {
      nlohmann::json entries = nlohmann::json::array();
      for (auto [fs, lender_vlink] : off.per_link[li])
        entries.push_back({{"fs", fs}, {"vlink", lender_vlink}});
      links.push_back({{"link", vl->route[li]}, {"entries", entries}});
    }
    bus_.post(MsgKind::TradeOffer, peer.von_id, req.von,
              {{"von", peer.von_id},
               {"credit", off.credit},
               {"links", links}});
    received.push_back(std::move(off));
  }

  // RC-side selection: rebuild per-link pools from its own availability
  // plus the received offers, then run the common fill rule.
  std::vector<std::vector<LinkOffer>> pools(vl->route.size());
  for (size_t li = 0; li < vl->route.size(); ++li) {
    for (const LinkOffer& o : rc.own_offers[vl->route[li]]) {
      if (!o.used) pools[li].push_back(o);
    }
    for (const ReceivedOffer& off : received) {
      for (auto [fs, lender_vlink] : off.per_link[li]) {
        pools[li].push_back({fs, off.von, lender_vlink, off.credit});
      }
    }
    std::sort(pools[li].begin(), pools[li].end(),
              [](const LinkOffer& x, const LinkOffer& y) {
                return std::tie(x.credit, x.von, x.fs) <
                       std::tie(y.credit, y.von, y.fs);
              });
  }
  std::vector<std::vector<LinkOffer*>> candidates;
  for (auto& pool : pools) {
    candidates.push_back(
        eligible_offers(pool, req.von, vl->assigned_fs, vcat_mode_));
  }
  FillResult fill = fill_request(req.deficit, candidates);
  if (fill.t == 0) {
    rc.phase = Phase::Idle;
    for (ClientActor& a : actors_) a.phase = Phase::Idle;
    return;
  }

  std::vector<std::vector<LinkOffer>> chosen(vl->route.size());
  // Commits per TC; the RC's own entries are consumed locally.
  std::map<int, nlohmann::json> commit_grants;  // tc -> grant list
  for (size_t li = 0; li < vl->route.size(); ++li) {
    for (const LinkOffer* o : fill.chosen[li]) {
      chosen[li].push_back(*o);
      if (o->von == req.von) {
        // self-use: mark own availability
        for (LinkOffer& own : rc.own_offers[vl->route[li]]) {
          if (!own.used && own.fs == o->fs && own.vlink == o->vlink) {
            own.used = true;
            break;
          }
        }
      } else {
        commit_grants[o->von].push_back({{"link", vl->route[li]},
                                         {"fs", o->fs},
                                         {"vlink", o->vlink}});
      }
    }
  }
  rc.phase = Phase::Committing;
  for (auto& [tc, grants] : commit_grants) {
    bus_.post(MsgKind::TradeCommit, req.von, tc,
              {{"rc", req.von},
               {"rc_vlink", req.vlink},
               {"tc", tc},
               {"grants", grants}});
    // TC validates it actually offered every granted entry.
    ClientActor& tc_actor = actors_[tc];
    for (const auto& g : grants) {
      int link = g.at("link").get<int>();
      int fs = g.at("fs").get<int>();
      int lender_vlink = g.at("vlink").get<int>();
      bool found = false;
      for (LinkOffer& own : tc_actor.own_offers[link]) {
        if (!own.used && own.fs == fs && own.vlink == lender_vlink) {
          own.used = true;
          found = true;
          break;
        }
      }
      if (!found)
        throw ProtocolError("von " + std::to_string(tc) +
                            " committed an FS it did not offer");
    }
    bus_.post(MsgKind::TradeAck, tc, req.von, {{"tc", tc}});
    // Every actor observes the commit and updates its local records.
    GrantsByTc by_tc;
    for (const auto& g : grants)
      by_tc[tc][g.at("link").get<int>()].push_back(g.at("fs").get<int>());
    for (ClientActor& a : actors_) {
      Credit share =
          record_market_grants(a.trade_log[slot], slot, req.von, req.vlink,
                               by_tc, topo_);
      a.ledger_view[req.von] -= share;
      a.ledger_view[tc] += share;
    }
  }

  engine_.apply_choice(req, roles_, chosen, slot, slot_trades_);
  for (ClientActor& a : actors_) a.phase = Phase::Idle;
}

void ProtocolDriver::run_reclaim_protocol(int tc_von, int tc_vlink, int slot) {
  // Collect the loans to revert before touching state, for the notice.
  nlohmann::json reverted = nlohmann::json::array();
  for (const LoanRec& l : engine_.active_loans()) {
    if (l.owner_von == tc_von && l.owner_vlink == tc_vlink) {
      reverted.push_back({{"link", l.link},
                          {"fs", l.fs},
                          {"borrower", l.borrower_von},
                          {"borrower_vlink", l.borrower_vlink},
                          {"credit_micro", l.credit_micro}});
    }
  }
  bus_.post(MsgKind::ReclaimNotice, tc_von, -1,
            {{"von", tc_von}, {"vlink", tc_vlink}, {"reverted", reverted}});
  if (reverted.empty()) return;  // no-op notice

  std::map<int, int> shortfall =
      engine_.reclaim_release(tc_von, tc_vlink, roles_, slot, slot_trades_);

  // Actors mirror the reversal in their logs and ledger views.
  for (const auto& r : reverted) {
    Credit credit = r.at("credit_micro").get<Credit>();
    int borrower = r.at("borrower").get<int>();
    int borrower_vlink = r.at("borrower_vlink").get<int>();
    int link = r.at("link").get<int>();
    int fs = r.at("fs").get<int>();
    for (ClientActor& a : actors_) {
      excise_grant(a.trade_log[slot], slot, borrower_vlink, tc_von, link, fs,
                   topo_.normalized_length_micro(link));
      if (credit != 0) {
        a.ledger_view[tc_von] -= credit;
        a.ledger_view[borrower] += credit;
      }
    }
    // The lender withdraws its remaining offers for this vlink.
    for (auto& pool : actors_[tc_von].own_offers) {
      for (LinkOffer& o : pool)
        if (o.vlink == tc_vlink) o.used = true;
    }
  }

  // Shortfall re-requests in the original slot order.
  for (const RcRequest& req : roles_.rc_order) {
    auto it = shortfall.find(req.vlink);
    if (it == shortfall.end() || it->second <= 0) continue;
    run_session({req.von, req.vlink, it->second}, slot);
  }
  trade_log_[slot] = slot_trades_;
}

bool ProtocolDriver::commit_block(int slot) {
  trade_log_[slot] = slot_trades_;
  auto creator = select_creator(slot_trades_, topo_);
  if (!creator) return false;

  ClientActor& maker = actors_[*creator];
  auto txs = transactions_from_trades(maker.trade_log[slot],
                                      maker.chain.next_serial());
  Block block =
      build_block(maker.chain.tip_hash(), *creator, slot, std::move(txs));
  std::vector<uint8_t> bytes = encode_block(block);
  bus_.post(MsgKind::BlockAnnounce, *creator, -1,
            {{"creator", *creator},
             {"slot", slot},
             {"bytes", nlohmann::json(bytes)}});

  bool all_ok = true;
  for (ClientActor& a : actors_) {
    bool ok = true;
    std::string why;
    if (block.prev_hash != a.chain.tip_hash()) {
      ok = false;
      why = "hash link mismatch";
    } else if (block.hash != sha256(encode_block_body(block))) {
      ok = false;
      why = "hash mismatch";
    } else {
      auto expected = transactions_from_trades(a.trade_log[slot],
                                               a.chain.next_serial());
      if (block.txs != expected) {
        ok = false;
        why = "transactions differ from local trade log";
      }
    }
    bus_.post(MsgKind::BlockConfirm, a.von_id, *creator,
              {{"von", a.von_id}, {"ok", ok}, {"reason", why}});
    all_ok = all_ok && ok;
  }
  if (!all_ok) return false;
  for (ClientActor& a : actors_) a.chain.append(block);
  return true;
}

void ProtocolDriver::end_slot() {
  bus_.post(MsgKind::ReleaseNotice, -1, -1, {{"slot", current_slot_}});
  engine_.release_slot();
}

}  // namespace stsim
