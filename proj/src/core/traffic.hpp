// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "core/von.hpp"

namespace stsim {

// demands[vlink id][slot] = offered Gb/s, uniform in [10, 2X-10].
using DemandMatrix = std::vector<std::vector<double>>;

DemandMatrix generate_demands(Rng& rng, const std::vector<Von>& vons,
                              int slots);

// ceil(offered / per-FS capacity); 0 for zero offered traffic.
int fs_needed(double offered_gbps, const Modulation& mod);

struct VlinkSlotResult {
  int vlink = -1;
  double offered = 0.0;
  double carried = 0.0;
  double blocked = 0.0;
  int own_fs_used = 0;
  int traded_fs_used = 0;
};

}  // namespace stsim
