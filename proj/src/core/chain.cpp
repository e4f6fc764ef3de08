// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#include "core/chain.hpp"

#include <algorithm>
#include <map>

#include <openssl/sha.h>

#include <json.hpp>

namespace stsim {

Digest sha256(std::span<const uint8_t> bytes) {
  Digest d;
  SHA256(bytes.data(), bytes.size(), d.data());
  return d;
}

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t get_u32(std::span<const uint8_t> bytes, size_t& pos) {
  if (pos + 4 > bytes.size()) throw ChainError("truncated u32");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[pos++]) << (8 * i);
  return v;
}

uint64_t get_u64(std::span<const uint8_t> bytes, size_t& pos) {
  if (pos + 8 > bytes.size()) throw ChainError("truncated u64");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(bytes[pos++]) << (8 * i);
  return v;
}

void check_count(uint64_t count, size_t remaining, size_t min_item_bytes) {
  if (count > remaining / min_item_bytes) throw ChainError("count out of range");
}

}  // namespace

void encode_tx(const Transaction& tx, std::vector<uint8_t>& out) {
  put_u64(out, tx.serial);
  put_u32(out, tx.slot);
  put_u32(out, tx.rc);
  put_u32(out, tx.tc);
  put_u32(out, static_cast<uint32_t>(tx.grants.size()));
  for (const auto& [link, fs_list] : tx.grants) {
    put_u32(out, link);
    put_u32(out, static_cast<uint32_t>(fs_list.size()));
    for (uint32_t fs : fs_list) put_u32(out, fs);
  }
}

Transaction decode_tx(std::span<const uint8_t> bytes, size_t& pos) {
  Transaction tx;
  tx.serial = get_u64(bytes, pos);
  tx.slot = get_u32(bytes, pos);
  tx.rc = get_u32(bytes, pos);
  tx.tc = get_u32(bytes, pos);
  uint32_t n_grants = get_u32(bytes, pos);
  check_count(n_grants, bytes.size() - pos, 8);
  for (uint32_t g = 0; g < n_grants; ++g) {
    uint32_t link = get_u32(bytes, pos);
    uint32_t n_fs = get_u32(bytes, pos);
    check_count(n_fs, bytes.size() - pos, 4);
    std::vector<uint32_t> fs_list;
    fs_list.reserve(n_fs);
    for (uint32_t i = 0; i < n_fs; ++i) fs_list.push_back(get_u32(bytes, pos));
    tx.grants.push_back({link, std::move(fs_list)});
  }
  return tx;
}

std::vector<uint8_t> encode_block_body(const Block& b) {
  std::vector<uint8_t> out;
  out.insert(out.end(), b.prev_hash.begin(), b.prev_hash.end());
  put_u32(out, b.creator);
  put_u32(out, b.slot);
  put_u32(out, static_cast<uint32_t>(b.txs.size()));
  for (const Transaction& tx : b.txs) encode_tx(tx, out);
  return out;
}

std::vector<uint8_t> encode_block(const Block& b) {
  std::vector<uint8_t> out = encode_block_body(b);
  out.insert(out.end(), b.hash.begin(), b.hash.end());
  return out;
}

Block decode_block(std::span<const uint8_t> bytes, size_t& pos) {
  Block b;
  if (pos + 32 > bytes.size()) throw ChainError("truncated block header");
  std::copy_n(bytes.begin() + pos, 32, b.prev_hash.begin());
  pos += 32;
  b.creator = get_u32(bytes, pos);
  b.slot = get_u32(bytes, pos);
  uint32_t n_txs = get_u32(bytes, pos);
  check_count(n_txs, bytes.size() - pos, 20);
  for (uint32_t i = 0; i < n_txs; ++i) b.txs.push_back(decode_tx(bytes, pos));
  if (pos + 32 > bytes.size()) throw ChainError("truncated block hash");
  std::copy_n(bytes.begin() + pos, 32, b.hash.begin());
  pos += 32;
  return b;
}

void Chain::append(Block b) {
  if (b.prev_hash != tip_hash()) throw ChainError("hash link mismatch");
  Digest expected = sha256(encode_block_body(b));
  if (b.hash != expected) throw ChainError("block hash mismatch");
  for (const Transaction& tx : b.txs) {
    if (tx.serial != next_serial_) throw ChainError("serial out of order");
    ++next_serial_;
  }
  blocks_.push_back(std::move(b));
}

std::vector<uint8_t> Chain::encode() const {
  std::vector<uint8_t> out;
  for (const Block& b : blocks_) {
    std::vector<uint8_t> bb = encode_block(b);
    out.insert(out.end(), bb.begin(), bb.end());
  }
  return out;
}

Chain Chain::decode(std::span<const uint8_t> bytes) {
  Chain c;
  size_t pos = 0;
  while (pos < bytes.size()) {
    c.append(decode_block(bytes, pos));
  }
  return c;
}

std::string Chain::to_json() const {
  nlohmann::json doc = nlohmann::json::array();
  auto hex = [](const Digest& d) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (uint8_t b : d) {
      s.push_back(digits[b >> 4]);
      s.push_back(digits[b & 0xf]);
    }
    return s;
  };
  for (const Block& b : blocks_) {
    nlohmann::json jb;
    jb["prev_hash"] = hex(b.prev_hash);
    jb["creator"] = b.creator;
    jb["slot"] = b.slot;
    jb["hash"] = hex(b.hash);
    jb["transactions"] = nlohmann::json::array();
    for (const Transaction& tx : b.txs) {
      nlohmann::json jt;
      jt["serial"] = tx.serial;
      jt["slot"] = tx.slot;
      jt["rc"] = tx.rc;
      jt["tc"] = tx.tc;
      jt["grants"] = nlohmann::json::array();
      for (const auto& [link, fs_list] : tx.grants) {
        jt["grants"].push_back({{"link", link}, {"fs", fs_list}});
      }
      jb["transactions"].push_back(std::move(jt));
    }
    doc.push_back(std::move(jb));
  }
  return doc.dump(1);
}

Chain Chain::from_json(const std::string& text) {
  auto unhex = [](const std::string& s) {
    if (s.size() != 64) throw ChainError("bad digest length");
    Digest d;
    for (size_t i = 0; i < 32; ++i) {
      d[i] = static_cast<uint8_t>(std::stoi(s.substr(2 * i, 2), nullptr, 16));
    }
    return d;
  };
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ChainError(std::string("chain json parse error: ") + e.what());
  }
  Chain c;
  for (const auto& jb : doc) {
    Block b;
    b.prev_hash = unhex(jb.at("prev_hash").get<std::string>());
    b.creator = jb.at("creator").get<uint32_t>();
    b.slot = jb.at("slot").get<uint32_t>();
    b.hash = unhex(jb.at("hash").get<std::string>());
    for (const auto& jt : jb.at("transactions")) {
      Transaction tx;
      tx.serial = jt.at("serial").get<uint64_t>();
      tx.slot = jt.at("slot").get<uint32_t>();
      tx.rc = jt.at("rc").get<uint32_t>();
      tx.tc = jt.at("tc").get<uint32_t>();
      for (const auto& jg : jt.at("grants")) {
        tx.grants.push_back({jg.at("link").get<uint32_t>(),
                             jg.at("fs").get<std::vector<uint32_t>>()});
      }
      b.txs.push_back(std::move(tx));
    }
    c.append(std::move(b));
  }
  return c;
}

std::vector<std::pair<int, int64_t>> slot_contributions(
    const std::vector<Trade>& trades, const Topology& topo, bool by_credit) {
  std::map<int, int64_t> earned;
  for (const Trade& t : trades) {
    for (const Contribution& c : t.contributions) {
      if (by_credit) {
        earned[c.tc] += credit_of(c, topo);
      } else {
        for (const auto& [link, fs_list] : c.grants)
          earned[c.tc] += static_cast<int64_t>(fs_list.size());
      }
    }
  }
  return {earned.begin(), earned.end()};
}

std::optional<int> select_creator(const std::vector<Trade>& trades,
                                  const Topology& topo, bool by_credit) {
  auto earned = slot_contributions(trades, topo, by_credit);
  if (earned.empty()) return std::nullopt;
  int best = -1;
  int64_t best_amount = -1;
  for (auto [von, amount] : earned) {  // map order: ids ascending
    if (amount > best_amount) {
      best = von;
      best_amount = amount;
    }
  }
  return best;
}

std::vector<Transaction> transactions_from_trades(
    const std::vector<Trade>& trades, uint64_t first_serial) {
  std::vector<Transaction> txs;
  uint64_t serial = first_serial;
  for (const Trade& t : trades) {
    for (const Contribution& c : t.contributions) {
      Transaction tx;
      tx.serial = serial++;
      tx.slot = static_cast<uint32_t>(t.slot);
      tx.rc = static_cast<uint32_t>(t.rc);
      tx.tc = static_cast<uint32_t>(c.tc);
      for (const auto& [link, fs_list] : c.grants) {
        std::vector<uint32_t> fs(fs_list.begin(), fs_list.end());
        tx.grants.push_back({static_cast<uint32_t>(link), std::move(fs)});
      }
      if (tx.grants.empty()) throw ChainError("transaction with empty grants");
      txs.push_back(std::move(tx));
    }
  }
  return txs;
}

Block build_block(const Digest& prev_hash, int creator, int slot,
                  std::vector<Transaction> txs) {
  Block b;
  b.prev_hash = prev_hash;
  b.creator = static_cast<uint32_t>(creator);
  b.slot = static_cast<uint32_t>(slot);
  b.txs = std::move(txs);
  b.hash = sha256(encode_block_body(b));
  return b;
}

Chain chain_from_trade_log(const Topology& topo,
                           const std::vector<std::vector<Trade>>& trade_log,
                           bool by_credit) {
  Chain chain;
  for (size_t slot = 0; slot < trade_log.size(); ++slot) {
    const auto& trades = trade_log[slot];
    auto creator = select_creator(trades, topo, by_credit);
    if (!creator) continue;
    auto txs = transactions_from_trades(trades, chain.next_serial());
    chain.append(build_block(chain.tip_hash(), *creator,
                             static_cast<int>(slot), std::move(txs)));
  }
  return chain;
}

VerifyResult verify_chain(const Chain& chain, const Topology& topo,
                          const std::vector<std::vector<Trade>>& trade_log,
                          bool by_credit) {
  Chain expected = chain_from_trade_log(topo, trade_log, by_credit);
  const auto& got = chain.blocks();
  const auto& want = expected.blocks();
  Digest prev = kZeroDigest;
  for (size_t i = 0; i < got.size(); ++i) {
    const Block& b = got[i];
    if (b.prev_hash != prev)
      return {false, static_cast<int>(i), "hash link mismatch"};
    if (b.hash != sha256(encode_block_body(b)))
      return {false, static_cast<int>(i), "block hash mismatch"};
    if (i >= want.size() || b != want[i])
      return {false, static_cast<int>(i), "content differs from trade log"};
    prev = b.hash;
  }
  if (got.size() != want.size())
    return {false, static_cast<int>(got.size()), "missing blocks"};
  return {};
}

}  // namespace stsim
