// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#include "core/trading.hpp"

#include <algorithm>
#include <set>

namespace stsim {

Credit credit_of(const Contribution& contribution, const Topology& topo) {
  Credit total = 0;
  for (const auto& [link, fs_set] : contribution.grants) {
    total += static_cast<Credit>(fs_set.size()) *
             topo.normalized_length_micro(link);
  }
  return total;
}

std::vector<LinkOffer*> eligible_offers(std::vector<LinkOffer>& pool,
                                        int rc_von,
                                        const std::vector<int>& rc_block,
                                        bool vcat_mode) {
  std::vector<LinkOffer*> self_entries;
  std::vector<LinkOffer*> market;
  std::set<int> avail_fs;
  for (LinkOffer& o : pool) {
    if (o.used) continue;
    avail_fs.insert(o.fs);
    if (o.von == rc_von)
      self_entries.push_back(&o);
    else
      market.push_back(&o);
  }
  std::set<int> qualifying;
  if (!vcat_mode) {
    // Offered indices qualify only if they extend the RC's contiguous
    // block through other offered indices.
    int lo = rc_block.front();
    int hi = rc_block.back();
    for (int fs = lo - 1; avail_fs.count(fs); --fs) qualifying.insert(fs);
    for (int fs = hi + 1; avail_fs.count(fs); ++fs) qualifying.insert(fs);
  }
  auto keep = [&](const LinkOffer* o) {
    return vcat_mode || qualifying.count(o->fs) > 0;
  };
  std::vector<LinkOffer*> out;
  for (LinkOffer* o : self_entries)
    if (keep(o)) out.push_back(o);
  for (LinkOffer* o : market)
    if (keep(o)) out.push_back(o);
  return out;
}

FillResult fill_request(int deficit,
                        std::vector<std::vector<LinkOffer*>>& candidates) {
  FillResult result;
  size_t t = static_cast<size_t>(std::max(deficit, 0));
  for (const auto& list : candidates) t = std::min(t, list.size());
  result.t = static_cast<int>(t);
  for (auto& list : candidates) {
    result.chosen.emplace_back(list.begin(), list.begin() + t);
  }
  return result;
}

TradingEngine::TradingEngine(const Topology& topo, SpectrumGrid& grid,
                             const std::vector<Von>& vons, Credit threshold_mu,
                             bool vcat_mode)
    : topo_(topo),
      grid_(grid),
      vons_(vons),
      vlinks_(collect_links(vons)),
      ledger_(static_cast<int>(vons.size()), threshold_mu),
      vcat_(vcat_mode) {}

Roles TradingEngine::classify_roles(const DemandMatrix& demands,
                                    int slot) const {
  Roles roles;
  roles.offers.resize(topo_.link_count());
  roles.credit_snapshot.resize(vons_.size());
  roles.gated.assign(vons_.size(), 0);
  for (size_t v = 0; v < vons_.size(); ++v) {
    roles.credit_snapshot[v] = ledger_.balance(static_cast<int>(v));
    roles.gated[v] = ledger_.may_request(static_cast<int>(v)) ? 0 : 1;
  }
  for (const VirtualLink* vl : vlinks_) {
    int needed = fs_needed(demands[vl->id][slot], *vl->mod);
    int assigned = vl->fs_count();
    if (needed > assigned && !roles.gated[vl->von_id]) {
      roles.rc_order.push_back({vl->von_id, vl->id, needed - assigned});
    }
    int surplus = assigned - needed;
    if (surplus > 0) {
      // Highest-index FSs are offered first; low indices stay stable.
      for (int i = assigned - surplus; i < assigned; ++i) {
        int fs = vl->assigned_fs[i];
        for (int link : vl->route) {
          roles.offers[link].push_back(
              {fs, vl->von_id, vl->id, roles.credit_snapshot[vl->von_id]});
        }
      }
    }
  }
  for (auto& pool : roles.offers) {
    std::sort(pool.begin(), pool.end(),
              [](const LinkOffer& x, const LinkOffer& y) {
                return std::tie(x.credit, x.von, x.fs) <
                       std::tie(y.credit, y.von, y.fs);
              });
  }
  std::stable_sort(roles.rc_order.begin(), roles.rc_order.end(),
                   [&roles](const RcRequest& x, const RcRequest& y) {
                     Credit cx = roles.credit_snapshot[x.von];
                     Credit cy = roles.credit_snapshot[y.von];
                     if (cx != cy) return cx > cy;
                     if (x.von != y.von) return x.von < y.von;
                     return x.vlink < y.vlink;
                   });
  return roles;
}

Credit record_market_grants(std::vector<Trade>& trades, int slot, int rc,
                            int rc_vlink, const GrantsByTc& grants_by_tc,
                            const Topology& topo) {
  if (grants_by_tc.empty()) return 0;
  Trade* trade = nullptr;
  for (Trade& t : trades) {
    if (t.rc_vlink == rc_vlink && t.slot == slot) trade = &t;
  }
  if (!trade) {
    trades.push_back({slot, rc, rc_vlink, {}, 0});
    trade = &trades.back();
  }
  Credit total = 0;
  for (const auto& [tc, grants] : grants_by_tc) {
    Credit share = 0;
    Contribution* contrib = nullptr;
    for (Contribution& c : trade->contributions)
      if (c.tc == tc) contrib = &c;
    if (!contrib) {
      auto pos = std::find_if(trade->contributions.begin(),
                              trade->contributions.end(),
                              [tc = tc](const Contribution& c) { return c.tc > tc; });
      contrib = &*trade->contributions.insert(pos, {tc, {}});
    }
    for (const auto& [link, fs_list] : grants) {
      share += static_cast<Credit>(fs_list.size()) *
               topo.normalized_length_micro(link);
      std::vector<int>* dest = nullptr;
      for (auto& [l, lst] : contrib->grants)
        if (l == link) dest = &lst;
      if (!dest) {
        auto pos = std::find_if(
            contrib->grants.begin(), contrib->grants.end(),
            [link = link](const auto& g) { return g.first > link; });
        dest = &contrib->grants.insert(pos, {link, {}})->second;
      }
      dest->insert(dest->end(), fs_list.begin(), fs_list.end());
      std::sort(dest->begin(), dest->end());
    }
    trade->credit_delta += share;
    total += share;
  }
  return total;
}

void excise_grant(std::vector<Trade>& trades, int slot, int rc_vlink, int tc,
                  int link, int fs, Credit l_micro) {
  for (Trade& t : trades) {
    if (t.rc_vlink != rc_vlink || t.slot != slot) continue;
    for (auto cit = t.contributions.begin(); cit != t.contributions.end();) {
      if (cit->tc != tc) {
        ++cit;
        continue;
      }
      for (auto git = cit->grants.begin(); git != cit->grants.end();) {
        if (git->first == link) {
          auto& fs_list = git->second;
          auto fit = std::find(fs_list.begin(), fs_list.end(), fs);
          if (fit != fs_list.end()) {
            fs_list.erase(fit);
            t.credit_delta -= l_micro;
          }
        }
        if (git->second.empty())
          git = cit->grants.erase(git);
        else
          ++git;
      }
      if (cit->grants.empty())
        cit = t.contributions.erase(cit);
      else
        ++cit;
    }
  }
  std::erase_if(trades,
                [](const Trade& t) { return t.contributions.empty(); });
}

int TradingEngine::fill_and_apply(const RcRequest& req, Roles& roles, int slot,
                                  std::vector<Trade>& trades) {
  const VirtualLink* vl = vlinks_[req.vlink];
  std::vector<std::vector<LinkOffer*>> candidates;
  candidates.reserve(vl->route.size());
  for (int link : vl->route) {
    candidates.push_back(
        eligible_offers(roles.offers[link], req.von, vl->assigned_fs, vcat_));
  }
  FillResult fill = fill_request(req.deficit, candidates);
  if (fill.t == 0) return 0;
  std::vector<std::vector<LinkOffer>> chosen;
  chosen.reserve(fill.chosen.size());
  for (const auto& list : fill.chosen) {
    std::vector<LinkOffer> vals;
    for (const LinkOffer* o : list) vals.push_back(*o);
    chosen.push_back(std::move(vals));
  }
  apply_choice(req, roles, chosen, slot, trades);
  return fill.t;
}

void TradingEngine::apply_choice(const RcRequest& req, Roles& roles,
                                 const std::vector<std::vector<LinkOffer>>& chosen,
                                 int slot, std::vector<Trade>& trades) {
  const VirtualLink* vl = vlinks_[req.vlink];
  GrantsByTc market_grants;
  int t = 0;
  for (size_t li = 0; li < vl->route.size(); ++li) {
    int link = vl->route[li];
    t = static_cast<int>(chosen[li].size());
    for (const LinkOffer& o : chosen[li]) {
      // mark the matching pool entry used
      bool marked = false;
      for (LinkOffer& p : roles.offers[link]) {
        if (!p.used && p.fs == o.fs && p.von == o.von && p.vlink == o.vlink) {
          p.used = true;
          marked = true;
          break;
        }
      }
      if (!marked)
        throw SpectrumError("chosen offer not present in the slot pools");
      if (o.von == req.von) {
        grid_.loan(link, o.fs, req.von, req.von);
        loans_.push_back({link, o.fs, o.von, o.vlink, req.von, req.vlink, 0});
      } else {
        grid_.loan(link, o.fs, o.von, req.von);
        Credit share = topo_.normalized_length_micro(link);
        loans_.push_back(
            {link, o.fs, o.von, o.vlink, req.von, req.vlink, share});
        market_grants[o.von][link].push_back(o.fs);
      }
    }
  }
  acquired_[req.vlink] += t;
  Credit total =
      record_market_grants(trades, slot, req.von, req.vlink, market_grants, topo_);
  for (const auto& [tc, grants] : market_grants) {
    Credit share = 0;
    for (const auto& [link, fs_list] : grants)
      share += static_cast<Credit>(fs_list.size()) *
               topo_.normalized_length_micro(link);
    ledger_.transfer(req.von, tc, share);
  }
  (void)total;
}

std::vector<Trade> TradingEngine::select_trades(Roles& roles, int slot) {
  std::vector<Trade> trades;
  for (const RcRequest& req : roles.rc_order) {
    fill_and_apply(req, roles, slot, trades);
  }
  return trades;
}

std::map<int, int> TradingEngine::reclaim_release(int tc_von, int tc_vlink,
                                                  Roles& roles, int slot,
                                                  std::vector<Trade>& trades) {
  std::vector<LoanRec> reclaimed;
  std::vector<LoanRec> remaining;
  for (const LoanRec& l : loans_) {
    if (l.owner_von == tc_von && l.owner_vlink == tc_vlink)
      reclaimed.push_back(l);
    else
      remaining.push_back(l);
  }
  if (reclaimed.empty()) return {};  // no active loans: no-op
  loans_ = std::move(remaining);

  std::map<int, int> shortfall;  // borrower vlink -> lost FSs
  for (const LoanRec& l : reclaimed) {
    grid_.unloan(l.link, l.fs);
    if (l.credit_micro != 0)
      ledger_.transfer(l.owner_von, l.borrower_von, l.credit_micro);
    acquired_[l.borrower_vlink] -= 1;
    shortfall[l.borrower_vlink] += 1;
    excise_grant(trades, slot, l.borrower_vlink, l.owner_von, l.link, l.fs,
                 topo_.normalized_length_micro(l.link));
  }

  // The lender's surplus is gone; withdraw its remaining offers.
  for (auto& pool : roles.offers) {
    for (LinkOffer& o : pool) {
      if (o.vlink == tc_vlink) o.used = true;
    }
  }
  return shortfall;
}

void TradingEngine::reclaim(int tc_von, int tc_vlink, Roles& roles, int slot,
                            std::vector<Trade>& trades) {
  std::map<int, int> shortfall =
      reclaim_release(tc_von, tc_vlink, roles, slot, trades);
  // Affected RCs re-request the shortfall, in the original slot order.
  // Self-use shortfalls of vlinks that never entered rc_order simply lose
  // the capacity.
  for (const RcRequest& req : roles.rc_order) {
    auto it = shortfall.find(req.vlink);
    if (it == shortfall.end() || it->second <= 0) continue;
    fill_and_apply({req.von, req.vlink, it->second}, roles, slot, trades);
  }
}

void TradingEngine::release_slot() {
  for (const LoanRec& l : loans_) grid_.unloan(l.link, l.fs);
  loans_.clear();
  acquired_.clear();
}

int TradingEngine::acquired_count(int vlink) const {
  auto it = acquired_.find(vlink);
  return it == acquired_.end() ? 0 : it->second;
}

std::vector<VlinkSlotResult> TradingEngine::settle_slot(
    const DemandMatrix& demands, int slot) const {
  // (owner vlink, link) -> loaned-out count
  std::map<std::pair<int, int>, int> loaned;
  for (const LoanRec& l : loans_) loaned[{l.owner_vlink, l.link}] += 1;

  std::vector<VlinkSlotResult> results;
  results.reserve(vlinks_.size());
  for (const VirtualLink* vl : vlinks_) {
    VlinkSlotResult r;
    r.vlink = vl->id;
    r.offered = demands[vl->id][slot];
    int assigned = vl->fs_count();
    int max_loaned = 0;
    for (int link : vl->route) {
      auto it = loaned.find({vl->id, link});
      if (it != loaned.end()) max_loaned = std::max(max_loaned, it->second);
    }
    int own_avail = assigned - max_loaned;
    int acquired = acquired_count(vl->id);
    double cap = vl->mod->fs_capacity_gbps;
    r.carried = std::min(r.offered, (own_avail + acquired) * cap);
    r.blocked = r.offered - r.carried;
    r.own_fs_used = std::min(fs_needed(r.offered, *vl->mod), own_avail);
    r.traded_fs_used = acquired;
    results.push_back(r);
  }
  return results;
}

}  // namespace stsim
