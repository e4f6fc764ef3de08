// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#include "core/spectrum.hpp"

#include <stdexcept>

namespace stsim {

SpectrumGrid::SpectrumGrid(int link_count, int fs_total) : fs_total_(fs_total) {
  if (link_count <= 0 || fs_total <= 0)
    throw SpectrumError("grid dimensions must be positive");
  cells_.assign(link_count, std::vector<Cell>(fs_total));
}

Cell& SpectrumGrid::mut_cell(int link, int fs) {
  return cells_.at(link).at(fs);
}

void SpectrumGrid::fail(const std::string& what) {
  ++violations_;
  throw SpectrumError(what);
}

void SpectrumGrid::occupy(int link, int fs, int von) {
  Cell& c = mut_cell(link, fs);
  if (c.state != Ownership::Free)
    fail("occupy: cell not free at link " + std::to_string(link) + " fs " +
         std::to_string(fs));
  c = {Ownership::Owned, von, -1};
  ++mutations_;
  ++checks_passed_;
}

void SpectrumGrid::vacate(int link, int fs, int von) {
  Cell& c = mut_cell(link, fs);
  if (c.state != Ownership::Owned || c.owner != von)
    fail("vacate: cell not owned by von " + std::to_string(von));
  c = {};
  ++mutations_;
  ++checks_passed_;
}

void SpectrumGrid::loan(int link, int fs, int owner, int borrower) {
  Cell& c = mut_cell(link, fs);
  if (c.state != Ownership::Owned || c.owner != owner)
    fail("loan: cell not owned by von " + std::to_string(owner) + " at link " +
         std::to_string(link) + " fs " + std::to_string(fs));
  c.state = Ownership::Loaned;
  c.borrower = borrower;
  ++mutations_;
  ++checks_passed_;
}

void SpectrumGrid::unloan(int link, int fs) {
  Cell& c = mut_cell(link, fs);
  if (c.state != Ownership::Loaned)
    fail("unloan: cell not loaned at link " + std::to_string(link) + " fs " +
         std::to_string(fs));
  c.state = Ownership::Owned;
  c.borrower = -1;
  ++mutations_;
  ++checks_passed_;
}

int SpectrumGrid::loaned_cell_count() const {
  int n = 0;
  for (const auto& row : cells_)
    for (const Cell& c : row)
      if (c.state == Ownership::Loaned) ++n;
  return n;
}

std::optional<std::string> SpectrumGrid::audit() const {
  for (size_t link = 0; link < cells_.size(); ++link) {
    for (int fs = 0; fs < fs_total_; ++fs) {
      const Cell& c = cells_[link][fs];
      switch (c.state) {
        case Ownership::Free:
          if (c.owner != -1 || c.borrower != -1)
            return "free cell carries party ids at link " +
                   std::to_string(link) + " fs " + std::to_string(fs);
          break;
        case Ownership::Owned:
          if (c.owner < 0 || c.borrower != -1)
            return "owned cell inconsistent at link " + std::to_string(link) +
                   " fs " + std::to_string(fs);
          break;
        case Ownership::Loaned:
          if (c.owner < 0 || c.borrower < 0)
            return "loaned cell missing a party at link " +
                   std::to_string(link) + " fs " + std::to_string(fs);
          break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace stsim
