// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "core/rng.hpp"
#include "core/spectrum.hpp"
#include "core/topology.hpp"

namespace stsim {

struct Modulation {
  const char* name;
  int se_bits_per_symbol;
  double fs_capacity_gbps;
  double reach_km;
};

// Ordered by descending spectral efficiency.
inline constexpr std::array<Modulation, 3> kModulations = {{
    {"8QAM", 3, 75.0, 1000.0},
    {"QPSK", 2, 50.0, 2000.0},
    {"BPSK", 1, 25.0, 4000.0},
}};

class UnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Most spectrally efficient format whose transparent reach covers the
// route (inclusive comparison at the boundary).
const Modulation& select_modulation(double route_length_km);

// A capacity pipe: one physical route, a uniform-width FS block owned on
// every route link.
struct VirtualLink {
  int id;       // global, dense across the whole run
  int von_id;
  int va, vb;   // virtual endpoint ids within the VON
  std::vector<int> route;        // physical link ids, in order
  const Modulation* mod = nullptr;
  std::vector<int> assigned_fs;  // sorted; same indices on every route link

  int fs_count() const { return static_cast<int>(assigned_fs.size()); }
  double capacity_gbps() const { return fs_count() * mod->fs_capacity_gbps; }
};

struct VonSpec {
  int id;
  std::vector<int> node_map;  // virtual node -> physical node, injective
  std::vector<std::pair<int, int>> vedges;
};

struct Von {
  int id;
  std::vector<int> node_map;
  std::vector<VirtualLink> links;
};

// Random VON spec: v virtual nodes in [ceil(N/3), floor(2N/3)], e virtual
// links in [ceil(L/3), floor(2L/3)] clamped to a feasible simple connected
// graph; spanning tree plus random extra edges.
VonSpec generate_von_spec(Rng& rng, const Topology& topo, int von_id);

// First-fit embedding over the first feasible of k shortest paths.
// Returns nullopt (with the grid rolled back) when no virtual link fits.
std::optional<Von> embed_von(const VonSpec& spec, const Topology& topo,
                             SpectrumGrid& grid, int fs_per_vlink,
                             int guard_fs, int k_paths, int first_vlink_id);

struct EmbedAllResult {
  std::vector<Von> vons;
  int retries = 0;
  bool ok = true;
};

// Embeds von_count VONs, regenerating a failed spec from the next seed
// substream, up to max_retries regenerations in total.
EmbedAllResult embed_all(uint64_t seed, const Topology& topo,
                         SpectrumGrid& grid, int von_count, int fs_per_vlink,
                         int guard_fs, int k_paths, int max_retries);

// All virtual links of all VONs indexed by global vlink id.
std::vector<const VirtualLink*> collect_links(const std::vector<Von>& vons);

}  // namespace stsim
