// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/trading.hpp"

namespace stsim {

class ChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Digest = std::array<uint8_t, 32>;
inline constexpr Digest kZeroDigest{};

Digest sha256(std::span<const uint8_t> bytes);

struct Transaction {
  uint64_t serial;
  uint32_t slot;
  uint32_t rc;
  uint32_t tc;
  // (physical link index, sorted duplicate-free FS indices), link ascending
  std::vector<std::pair<uint32_t, std::vector<uint32_t>>> grants;

  bool operator==(const Transaction&) const = default;
};

struct Block {
  Digest prev_hash;
  uint32_t creator;
  uint32_t slot;
  std::vector<Transaction> txs;
  Digest hash;  // sha256 of the canonical body (everything above)

  bool operator==(const Block&) const = default;
};

// Canonical layout: little-endian fixed-width integers, length-prefixed
// lists, fields in declaration order. Injective by construction.
void encode_tx(const Transaction& tx, std::vector<uint8_t>& out);
std::vector<uint8_t> encode_block_body(const Block& b);  // without hash
std::vector<uint8_t> encode_block(const Block& b);       // body + hash
Transaction decode_tx(std::span<const uint8_t> bytes, size_t& pos);
Block decode_block(std::span<const uint8_t> bytes, size_t& pos);

class Chain {
 public:
  const std::vector<Block>& blocks() const { return blocks_; }
  Digest tip_hash() const {
    return blocks_.empty() ? kZeroDigest : blocks_.back().hash;
  }
  uint64_t next_serial() const { return next_serial_; }
  void append(Block b);
  bool operator==(const Chain&) const = default;

  std::vector<uint8_t> encode() const;  // concatenated canonical blocks
  static Chain decode(std::span<const uint8_t> bytes);
  std::string to_json() const;
  static Chain from_json(const std::string& text);

 private:
  std::vector<Block> blocks_;
  uint64_t next_serial_ = 0;
};

// Slot contribution per TC, in micro-credit (or raw FS count when
// by_credit is false).
std::vector<std::pair<int, int64_t>> slot_contributions(
    const std::vector<Trade>& trades, const Topology& topo, bool by_credit);

// PoC creator: largest contributor of the slot, ties to the lowest id.
// nullopt when the slot had no trades.
std::optional<int> select_creator(const std::vector<Trade>& trades,
                                  const Topology& topo,
                                  bool by_credit = true);

// One transaction per (RC, TC) pair of each trade, serials sequential.
std::vector<Transaction> transactions_from_trades(
    const std::vector<Trade>& trades, uint64_t first_serial);

Block build_block(const Digest& prev_hash, int creator, int slot,
                  std::vector<Transaction> txs);

struct VerifyResult {
  bool ok = true;
  int first_bad_block = -1;
  std::string reason;
};

// Recomputes the expected chain from the per-slot trade log and compares
// content, hash links, and hashes.
VerifyResult verify_chain(const Chain& chain, const Topology& topo,
                          const std::vector<std::vector<Trade>>& trade_log,
                          bool by_credit = true);

// Builds the reference chain for a trade log (what honest actors commit).
Chain chain_from_trade_log(const Topology& topo,
                           const std::vector<std::vector<Trade>>& trade_log,
                           bool by_credit = true);

}  // namespace stsim
