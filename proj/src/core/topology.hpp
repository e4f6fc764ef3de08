// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace stsim {

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PhysicalNode {
  int id;
  std::string name;
};

struct PhysicalLink {
  int id;
  int a, b;  // endpoint node ids, unordered
  double length_km;
};

// A loop-free physical route: ordered link ids plus total length.
struct Route {
  std::vector<int> links;
  double length_km = 0.0;
};

// Physical EON graph. Immutable after load; safe to share between runs.
class Topology {
 public:
  static Topology load_file(const std::string& path);
  static Topology load_text(const std::string& text);
  static Topology from_parts(std::vector<PhysicalNode> nodes,
                             std::vector<PhysicalLink> links);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int link_count() const { return static_cast<int>(links_.size()); }
  const PhysicalNode& node(int id) const { return nodes_.at(id); }
  const PhysicalLink& link(int id) const { return links_.at(id); }
  const std::vector<int>& links_at(int node) const { return adjacency_.at(node); }

  int other_end(int link_id, int node) const {
    const PhysicalLink& l = link(link_id);
    return l.a == node ? l.b : l.a;
  }

  // l_i = length / max link length, rounded to micro units. The longest
  // link maps to exactly 1.0. A fixed divisor (km) may be configured
  // instead of the per-topology maximum.
  double normalized_length(int link_id) const;
  int64_t normalized_length_micro(int link_id) const;
  void set_normalization_km(double km);  // 0 restores max-length rule

  double route_length_km(std::span<const int> link_ids) const;

  // Up to k loop-free shortest routes, ascending (length, link sequence).
  // Results are cached; the cache is internally synchronized.
  std::vector<Route> shortest_paths(int src, int dst, int k) const;

 private:
  Topology() = default;
  void validate() const;

  std::vector<PhysicalNode> nodes_;
  std::vector<PhysicalLink> links_;
  std::vector<std::vector<int>> adjacency_;
  double norm_base_km_ = 0.0;

  struct PathCache {
    std::mutex mutex;
    std::map<std::tuple<int, int, int>, std::vector<Route>> routes;
  };
  std::unique_ptr<PathCache> cache_ = std::make_unique<PathCache>();
};

}  // namespace stsim
