// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stsim {

class SpectrumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Ownership : uint8_t { Free, Owned, Loaned };

struct Cell {
  Ownership state = Ownership::Free;
  int32_t owner = -1;
  int32_t borrower = -1;
};

// Per-link frequency-slot ownership map. Single-writer: only the
// simulation scheduler mutates it. Every mutation validates the cell
// transition; counters record how many checks ran.
class SpectrumGrid {
 public:
  SpectrumGrid(int link_count, int fs_total);

  int link_count() const { return static_cast<int>(cells_.size()); }
  int fs_total() const { return fs_total_; }
  const Cell& cell(int link, int fs) const { return cells_.at(link).at(fs); }

  void occupy(int link, int fs, int von);       // Free -> Owned(von)
  void vacate(int link, int fs, int von);       // Owned(von) -> Free
  void loan(int link, int fs, int owner, int borrower);  // Owned -> Loaned
  void unloan(int link, int fs);                // Loaned -> Owned(owner)

  uint64_t mutation_count() const { return mutations_; }
  uint64_t checks_passed() const { return checks_passed_; }
  uint64_t violation_count() const { return violations_; }

  int loaned_cell_count() const;

  // Full consistency sweep: every cell has exactly one ownership value
  // and Loaned cells carry both parties. Returns an error description,
  // or nullopt when clean.
  std::optional<std::string> audit() const;

 private:
  Cell& mut_cell(int link, int fs);
  [[noreturn]] void fail(const std::string& what);

  std::vector<std::vector<Cell>> cells_;
  int fs_total_;
  uint64_t mutations_ = 0;
  uint64_t checks_passed_ = 0;
  uint64_t violations_ = 0;
};

}  // namespace stsim
