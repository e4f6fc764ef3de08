// Copyright (c) 2026 The stsim authors
// SPDX-License-Identifier: Apache-2.0

#include "core/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

namespace stsim {

namespace {

bool route_less(const Route& x, const Route& y) {
  if (x.length_km != y.length_km) return x.length_km < y.length_km;
  return x.links < y.links;
}

}  // namespace

Topology Topology::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_text(ss.str());
}

Topology Topology::load_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw TopologyError(std::string("topology parse error: ") + e.what());
  }
  std::vector<PhysicalNode> nodes;
  std::vector<PhysicalLink> links;
  try {
    for (const auto& n : doc.at("nodes")) {
      nodes.push_back({n.at("id").get<int>(), n.at("name").get<std::string>()});
    }
    for (const auto& l : doc.at("links")) {
      links.push_back({l.at("id").get<int>(), l.at("a").get<int>(),
                       l.at("b").get<int>(), l.at("length_km").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw TopologyError(std::string("topology parse error: ") + e.what());
  }
  return from_parts(std::move(nodes), std::move(links));
}

Topology Topology::from_parts(std::vector<PhysicalNode> nodes,
                              std::vector<PhysicalLink> links) {
  Topology t;
  t.nodes_ = std::move(nodes);
  t.links_ = std::move(links);
  t.validate();
  t.adjacency_.assign(t.nodes_.size(), {});
  double max_len = 0.0;
  for (const auto& l : t.links_) {
    t.adjacency_[l.a].push_back(l.id);
    t.adjacency_[l.b].push_back(l.id);
    max_len = std::max(max_len, l.length_km);
  }
  t.norm_base_km_ = max_len;
  return t;
}

void Topology::validate() const {
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != static_cast<int>(i))
      throw TopologyError("node ids must be dense 0..N-1");
  }
  std::set<std::string> names;
  for (const auto& n : nodes_) {
    if (!names.insert(n.name).second)
      throw TopologyError("duplicate node name: " + n.name);
  }
  std::set<std::pair<int, int>> pairs;
  for (size_t i = 0; i < links_.size(); ++i) {
    const PhysicalLink& l = links_[i];
    if (l.id != static_cast<int>(i))
      throw TopologyError("link ids must be dense 0..L-1");
    if (l.a == l.b) throw TopologyError("self-loop link " + std::to_string(l.id));
    if (l.a < 0 || l.b < 0 || l.a >= static_cast<int>(nodes_.size()) ||
        l.b >= static_cast<int>(nodes_.size()))
      throw TopologyError("link endpoint out of range");
    if (!(l.length_km > 0.0))
      throw TopologyError("nonpositive length on link " + std::to_string(l.id));
    if (!pairs.insert({std::min(l.a, l.b), std::max(l.a, l.b)}).second)
      throw TopologyError("duplicate edge between nodes " + std::to_string(l.a) +
                          " and " + std::to_string(l.b));
  }
  // connectivity
  if (nodes_.empty()) throw TopologyError("empty topology");
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  size_t count = 1;
  std::vector<std::vector<int>> adj(nodes_.size());
  for (const auto& l : links_) {
    adj[l.a].push_back(l.b);
    adj[l.b].push_back(l.a);
  }
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    for (int m : adj[n]) {
      if (!seen[m]) {
        seen[m] = 1;
        ++count;
        stack.push_back(m);
      }
    }
  }
  if (count != nodes_.size()) throw TopologyError("disconnected graph");
}

double Topology::normalized_length(int link_id) const {
  return static_cast<double>(normalized_length_micro(link_id)) * 1e-6;
}

int64_t Topology::normalized_length_micro(int link_id) const {
  if (link_id < 0 || link_id >= link_count())
    throw TopologyError("unknown link id " + std::to_string(link_id));
  return std::llround(links_[link_id].length_km / norm_base_km_ * 1e6);
}

void Topology::set_normalization_km(double km) {
  if (km > 0.0) {
    norm_base_km_ = km;
  } else {
    double max_len = 0.0;
    for (const auto& l : links_) max_len = std::max(max_len, l.length_km);
    norm_base_km_ = max_len;
  }
}

double Topology::route_length_km(std::span<const int> link_ids) const {
  double total = 0.0;
  for (int id : link_ids) total += link(id).length_km;
  return total;
}

namespace {

// Dijkstra with deterministic tie-breaking on the link-id sequence.
// banned_nodes/banned_links support Yen's spur computation.
std::optional<Route> dijkstra(const Topology& t, int src, int dst,
                              const std::vector<char>& banned_node,
                              const std::set<int>& banned_link) {
  struct Item {
    double dist;
    std::vector<int> links;
    int node;
    bool operator>(const Item& o) const {
      if (dist != o.dist) return dist > o.dist;
      return links > o.links;
    }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  pq.push({0.0, {}, src});
  std::set<int> done;
  while (!pq.empty()) {
    Item cur = pq.top();
    pq.pop();
    if (done.count(cur.node)) continue;
    done.insert(cur.node);
    if (cur.node == dst) return Route{std::move(cur.links), cur.dist};
    for (int lid : t.links_at(cur.node)) {
      if (banned_link.count(lid)) continue;
      int nb = t.other_end(lid, cur.node);
      if (banned_node[nb] || done.count(nb)) continue;
      Item next = cur;
      next.dist += t.link(lid).length_km;
      next.links.push_back(lid);
      next.node = nb;
      pq.push(std::move(next));
    }
  }
  return std::nullopt;
}

std::vector<int> route_nodes(const Topology& t, int src, const Route& r) {
  std::vector<int> nodes{src};
  int cur = src;
  for (int lid : r.links) {
    cur = t.other_end(lid, cur);
    nodes.push_back(cur);
  }
  return nodes;
}

}  // namespace

std::vector<Route> Topology::shortest_paths(int src, int dst, int k) const {
  if (src == dst) throw TopologyError("src == dst");
  if (k < 1) throw TopologyError("k must be >= 1");
  if (src < 0 || dst < 0 || src >= node_count() || dst >= node_count())
    throw TopologyError("unknown node id");
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->routes.find({src, dst, k});
    if (it != cache_->routes.end()) return it->second;
  }

  // Yen's algorithm.
  std::vector<Route> result;
  std::vector<char> no_ban(node_count(), 0);
  auto first = dijkstra(*this, src, dst, no_ban, {});
  if (first) result.push_back(std::move(*first));
  std::vector<Route> candidates;
  while (first && static_cast<int>(result.size()) < k) {
    const Route& prev = result.back();
    std::vector<int> prev_nodes = route_nodes(*this, src, prev);
    for (size_t spur = 0; spur < prev.links.size(); ++spur) {
      std::vector<int> root(prev.links.begin(), prev.links.begin() + spur);
      int spur_node = prev_nodes[spur];
      std::set<int> banned_links;
      for (const Route& r : result) {
        if (r.links.size() > spur &&
            std::equal(root.begin(), root.end(), r.links.begin()))
          banned_links.insert(r.links[spur]);
      }
      std::vector<char> banned_nodes(node_count(), 0);
      for (size_t i = 0; i < spur; ++i) banned_nodes[prev_nodes[i]] = 1;
      auto spur_route = dijkstra(*this, spur_node, dst, banned_nodes, banned_links);
      if (!spur_route) continue;
      Route total;
      total.links = root;
      total.links.insert(total.links.end(), spur_route->links.begin(),
                         spur_route->links.end());
      total.length_km = route_length_km(total.links);
      bool dup = false;
      for (const Route& r : result)
        if (r.links == total.links) dup = true;
      for (const Route& r : candidates)
        if (r.links == total.links) dup = true;
      if (!dup) candidates.push_back(std::move(total));
    }
    if (candidates.empty()) break;
    auto best = std::min_element(candidates.begin(), candidates.end(), route_less);
    result.push_back(std::move(*best));
    candidates.erase(best);
  }

  std::lock_guard<std::mutex> lock(cache_->mutex);
  cache_->routes[{src, dst, k}] = result;
  return result;
}

}  // namespace stsim
