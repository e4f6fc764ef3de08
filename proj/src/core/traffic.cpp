// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#include "core/traffic.hpp"

#include <cmath>

namespace stsim {

DemandMatrix generate_demands(Rng& rng, const std::vector<Von>& vons,
                              int slots) {
  auto links = collect_links(vons);
  DemandMatrix demands(links.size(), std::vector<double>(slots));
  for (size_t i = 0; i < links.size(); ++i) {
    double x = links[i]->capacity_gbps();
    for (int t = 0; t < slots; ++t) {
      demands[i][t] = rng.uniform_real(10.0, 2.0 * x - 10.0);
    }
  }
  return demands;
}

int fs_needed(double offered_gbps, const Modulation& mod) {
  if (offered_gbps <= 0.0) return 0;
  return static_cast<int>(std::ceil(offered_gbps / mod.fs_capacity_gbps));
}

}  // namespace stsim
