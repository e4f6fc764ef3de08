// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#include "core/von.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace stsim {

const Modulation& select_modulation(double route_length_km) {
  for (const Modulation& m : kModulations) {
    if (route_length_km <= m.reach_km) return m;
  }
  throw UnreachableError("route length " + std::to_string(route_length_km) +
                         " km exceeds every transparent reach");
}

VonSpec generate_von_spec(Rng& rng, const Topology& topo, int von_id) {
  const int n = topo.node_count();
  const int l = topo.link_count();
  int v_lo = (n + 2) / 3;
  int v_hi = (2 * n) / 3;
  int v = static_cast<int>(rng.uniform_int(v_lo, v_hi));
  if (v < 2) v = 2;
  int e_lo = (l + 2) / 3;
  int e_hi = (2 * l) / 3;
  int e = static_cast<int>(rng.uniform_int(e_lo, e_hi));
  int e_max = v * (v - 1) / 2;
  e = std::clamp(e, v - 1, e_max);

  VonSpec spec;
  spec.id = von_id;

  // Virtual nodes onto distinct physical nodes, uniform without replacement.
  std::vector<int> phys(n);
  std::iota(phys.begin(), phys.end(), 0);
  for (int i = 0; i < v; ++i) {
    int j = static_cast<int>(rng.uniform_int(i, n - 1));
    std::swap(phys[i], phys[j]);
  }
  spec.node_map.assign(phys.begin(), phys.begin() + v);

  // Random spanning tree: each node attaches to a random earlier node.
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i < v; ++i) {
    int j = static_cast<int>(rng.uniform_int(0, i - 1));
    edges.insert({std::min(i, j), std::max(i, j)});
  }
  while (static_cast<int>(edges.size()) < e) {
    int a = static_cast<int>(rng.uniform_int(0, v - 1));
    int b = static_cast<int>(rng.uniform_int(0, v - 1));
    if (a == b) continue;
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  spec.vedges.assign(edges.begin(), edges.end());
  return spec;
}

namespace {

// A candidate block must be Free on every route link, with guard_fs cells
// of separation from blocks of other VONs on each side.
bool block_fits(const SpectrumGrid& grid, const std::vector<int>& route,
                int start, int width, int guard, int von) {
  for (int link : route) {
    for (int fs = start; fs < start + width; ++fs) {
      if (grid.cell(link, fs).state != Ownership::Free) return false;
    }
    for (int g = 1; g <= guard; ++g) {
      int lo = start - g;
      int hi = start + width - 1 + g;
      if (lo >= 0) {
        const Cell& c = grid.cell(link, lo);
        if (c.state != Ownership::Free && c.owner != von) return false;
      }
      if (hi < grid.fs_total()) {
        const Cell& c = grid.cell(link, hi);
        if (c.state != Ownership::Free && c.owner != von) return false;
      }
    }
  }
  return true;
}

}  // namespace

std::optional<Von> embed_von(const VonSpec& spec, const Topology& topo,
                             SpectrumGrid& grid, int fs_per_vlink,
                             int guard_fs, int k_paths, int first_vlink_id) {
  Von von;
  von.id = spec.id;
  von.node_map = spec.node_map;
  std::vector<std::pair<int, int>> placed;  // (link, fs) for rollback

  auto rollback = [&] {
    for (auto [link, fs] : placed) grid.vacate(link, fs, spec.id);
  };

  int vlink_id = first_vlink_id;
  for (auto [va, vb] : spec.vedges) {
    int src = spec.node_map[va];
    int dst = spec.node_map[vb];
    auto routes = topo.shortest_paths(src, dst, k_paths);
    bool done = false;
    for (const Route& r : routes) {
      const Modulation* mod;
      try {
        mod = &select_modulation(r.length_km);
      } catch (const UnreachableError&) {
        continue;
      }
      for (int start = 0; start + fs_per_vlink <= grid.fs_total(); ++start) {
        if (!block_fits(grid, r.links, start, fs_per_vlink, guard_fs, spec.id))
          continue;
        VirtualLink vl;
        vl.id = vlink_id;
        vl.von_id = spec.id;
        vl.va = va;
        vl.vb = vb;
        vl.route = r.links;
        vl.mod = mod;
        for (int fs = start; fs < start + fs_per_vlink; ++fs) {
          vl.assigned_fs.push_back(fs);
          for (int link : r.links) {
            grid.occupy(link, fs, spec.id);
            placed.push_back({link, fs});
          }
        }
        von.links.push_back(std::move(vl));
        done = true;
        break;
      }
      if (done) break;
    }
    if (!done) {
      rollback();
      return std::nullopt;
    }
    ++vlink_id;
  }
  return von;
}

EmbedAllResult embed_all(uint64_t seed, const Topology& topo,
                         SpectrumGrid& grid, int von_count, int fs_per_vlink,
                         int guard_fs, int k_paths, int max_retries) {
  EmbedAllResult result;
  int next_vlink_id = 0;
  for (int i = 0; i < von_count; ++i) {
    bool embedded = false;
    for (uint64_t attempt = 0;; ++attempt) {
      Rng rng = substream(seed, "vonspec", static_cast<uint64_t>(i), attempt);
      VonSpec spec = generate_von_spec(rng, topo, i);
      auto von = embed_von(spec, topo, grid, fs_per_vlink, guard_fs, k_paths,
                           next_vlink_id);
      if (von) {
        next_vlink_id += static_cast<int>(von->links.size());
        result.vons.push_back(std::move(*von));
        embedded = true;
        break;
      }
      ++result.retries;
      if (result.retries > max_retries) break;
    }
    if (!embedded) {
      result.ok = false;
      break;
    }
  }
  return result;
}

std::vector<const VirtualLink*> collect_links(const std::vector<Von>& vons) {
  std::vector<const VirtualLink*> out;
  for (const Von& v : vons)
    for (const VirtualLink& vl : v.links) {
      if (vl.id != static_cast<int>(out.size()))
        throw std::logic_error("virtual link ids not dense");
      out.push_back(&vl);
    }
  return out;
}

}  // namespace stsim
