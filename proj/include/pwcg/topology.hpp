#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "pwcg/error.hpp"

namespace pwcg {

using NodeId = int;
using LinkId = int;
using CoreId = int;

struct Node {
  NodeId id = 0;
  std::string name;
};

// Undirected multicore fiber link. `a` and `b` are stored as given; use
// other() to walk across it.
struct Link {
  LinkId id = 0;
  NodeId a = 0;
  NodeId b = 0;
  double length_km = 0.0;
  double mttf_h = 0.0;

  bool touches(NodeId n) const { return a == n || b == n; }
  NodeId other(NodeId n) const { return n == a ? b : a; }
};

// Adjacency relation between the cores of one fiber. Symmetric, irreflexive.
class CoreLayout {
 public:
  CoreLayout() = default;

  CoreLayout(int cores, const std::vector<std::pair<CoreId, CoreId>>& pairs)
      : cores_(cores), neighbors_(static_cast<std::size_t>(std::max(cores, 0))) {
    if (cores <= 0) {
      throw Error(Errc::Validation, "cores_per_link must be positive");
    }
    for (auto [i, j] : pairs) {
      if (i < 0 || j < 0 || i >= cores || j >= cores) {
        throw Error(Errc::Validation, "core_adjacency refers to core outside 0.." +
                                          std::to_string(cores - 1));
      }
      if (i == j) {
        throw Error(Errc::Validation,
                    "core_adjacency must be irreflexive (core " + std::to_string(i) + ")");
      }
      auto& ni = neighbors_[static_cast<std::size_t>(i)];
      if (std::find(ni.begin(), ni.end(), j) == ni.end()) {
        ni.push_back(j);
        neighbors_[static_cast<std::size_t>(j)].push_back(i);
      }
    }
    for (auto& n : neighbors_) std::sort(n.begin(), n.end());
  }

  // Center core 0 surrounded by a ring of cores 1..6.
  static CoreLayout hexagonal7() {
    std::vector<std::pair<CoreId, CoreId>> pairs;
    for (CoreId k = 1; k <= 6; ++k) {
      pairs.emplace_back(0, k);
      pairs.emplace_back(k, k == 6 ? 1 : k + 1);
    }
    return CoreLayout(7, pairs);
  }

  int size() const { return cores_; }

  const std::vector<CoreId>& neighbors(CoreId k) const {
    return neighbors_[static_cast<std::size_t>(k)];
  }

  bool adjacent(CoreId i, CoreId j) const {
    const auto& n = neighbors(i);
    return std::binary_search(n.begin(), n.end(), j);
  }

  std::vector<std::pair<CoreId, CoreId>> pairs() const {
    std::vector<std::pair<CoreId, CoreId>> out;
    for (CoreId i = 0; i < cores_; ++i) {
      for (CoreId j : neighbors(i)) {
        if (i < j) out.emplace_back(i, j);
      }
    }
    return out;
  }

 private:
  int cores_ = 0;
  std::vector<std::vector<CoreId>> neighbors_;
};

struct Path {
  std::vector<LinkId> links;
  std::vector<NodeId> nodes;
  double length_km = 0.0;

  std::size_t hops() const { return links.size(); }
  bool uses(LinkId l) const { return std::find(links.begin(), links.end(), l) != links.end(); }
  friend bool operator==(const Path&, const Path&) = default;
};

// Set of links excluded from routing. An empty mask excludes nothing.
using LinkMask = std::vector<bool>;

class Network {
 public:
  struct Incidence {
    NodeId neighbor;
    LinkId link;
  };

  Network() = default;

  Network(std::vector<Node> nodes, std::vector<Link> links, CoreLayout layout)
      : nodes_(std::move(nodes)), links_(std::move(links)), layout_(std::move(layout)) {
    validate();
    incidence_.assign(nodes_.size(), {});
    for (const auto& l : links_) {
      incidence_[static_cast<std::size_t>(l.a)].push_back({l.b, l.id});
      incidence_[static_cast<std::size_t>(l.b)].push_back({l.a, l.id});
    }
    for (auto& inc : incidence_) {
      std::sort(inc.begin(), inc.end(),
                [](const Incidence& x, const Incidence& y) { return x.neighbor < y.neighbor; });
    }
    check_connected();
  }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int link_count() const { return static_cast<int>(links_.size()); }
  int cores() const { return layout_.size(); }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const Node& node(NodeId n) const { return nodes_.at(static_cast<std::size_t>(n)); }
  const Link& link(LinkId l) const { return links_.at(static_cast<std::size_t>(l)); }
  const CoreLayout& layout() const { return layout_; }

  // Sorted by neighbor id.
  const std::vector<Incidence>& incident(NodeId n) const {
    return incidence_.at(static_cast<std::size_t>(n));
  }

  std::optional<LinkId> link_between(NodeId u, NodeId v) const {
    for (const auto& inc : incident(u)) {
      if (inc.neighbor == v) return inc.link;
    }
    return std::nullopt;
  }

  bool has_node(NodeId n) const { return n >= 0 && n < node_count(); }

  void require_node(NodeId n) const {
    if (!has_node(n)) throw Error(Errc::UnknownNode, "node id " + std::to_string(n));
  }

  std::optional<NodeId> find_node(const std::string& name) const {
    for (const auto& n : nodes_) {
      if (n.name == name) return n.id;
    }
    return std::nullopt;
  }

  // Link id by endpoint names, e.g. link_named("B", "E").
  LinkId link_named(const std::string& u, const std::string& v) const {
    auto a = find_node(u);
    auto b = find_node(v);
    if (!a || !b) throw Error(Errc::UnknownNode, u + "-" + v);
    auto l = link_between(*a, *b);
    if (!l) throw Error(Errc::Precondition, "no link " + u + "-" + v);
    return *l;
  }

  std::string describe(const Path& p) const {
    std::string out;
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
      if (i) out += '-';
      out += node(p.nodes[i]).name;
    }
    return out;
  }

  std::string describe_link(LinkId l) const {
    return node(link(l).a).name + "-" + node(link(l).b).name;
  }

 private:
  void validate() const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].id != static_cast<NodeId>(i)) {
        throw Error(Errc::Validation, "node ids must be dense 0..V-1 in order (node index " +
                                          std::to_string(i) + " has id " +
                                          std::to_string(nodes_[i].id) + ")");
      }
    }
    std::vector<std::pair<NodeId, NodeId>> seen;
    for (std::size_t i = 0; i < links_.size(); ++i) {
      const auto& l = links_[i];
      const std::string where = "link " + std::to_string(i);
      if (l.id != static_cast<LinkId>(i)) {
        throw Error(Errc::Validation, where + ": link ids must be dense 0..L-1 in order");
      }
      if (!has_node(l.a) || !has_node(l.b)) {
        throw Error(Errc::Validation, where + ": endpoint is not a node");
      }
      if (l.a == l.b) throw Error(Errc::Validation, where + ": endpoints must be distinct");
      if (!(l.length_km > 0.0) || !std::isfinite(l.length_km)) {
        throw Error(Errc::Validation, where + ": length_km must be positive");
      }
      if (!(l.mttf_h > 0.0) || !std::isfinite(l.mttf_h)) {
        throw Error(Errc::Validation, where + ": mttf_h must be positive");
      }
      auto key = std::minmax(l.a, l.b);
      if (std::find(seen.begin(), seen.end(), std::pair(key.first, key.second)) != seen.end()) {
        throw Error(Errc::Validation, where + ": duplicate link between nodes " +
                                          std::to_string(key.first) + " and " +
                                          std::to_string(key.second));
      }
      seen.emplace_back(key.first, key.second);
    }
  }

  void check_connected() const {
    if (nodes_.empty()) throw Error(Errc::Validation, "network has no nodes");
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<NodeId> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (const auto& inc : incident(u)) {
        if (!seen[static_cast<std::size_t>(inc.neighbor)]) {
          seen[static_cast<std::size_t>(inc.neighbor)] = true;
          stack.push_back(inc.neighbor);
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw Error(Errc::Validation, "network is not connected");
    }
  }

  std::vector<Node> nodes_;
  std::vector<Link> links_;
  CoreLayout layout_;
  std::vector<std::vector<Incidence>> incidence_;
};

namespace detail {

inline bool excluded(const LinkMask& mask, LinkId l) {
  return !mask.empty() && mask[static_cast<std::size_t>(l)];
}

inline bool same_length(double x, double y) {
  return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace detail

// Minimum-length route; among equal-length routes the one whose node sequence
// is lexicographically smallest.
inline std::optional<Path> shortest_path(const Network& net, NodeId src, NodeId dst,
                                         const LinkMask& excluded = {}) {
  net.require_node(src);
  net.require_node(dst);
  if (src == dst) throw Error(Errc::Precondition, "shortest_path requires src != dst");

  // Distances to dst, then a greedy walk from src that always steps to the
  // smallest neighbor still on some shortest route.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(net.node_count()), inf);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<std::size_t>(dst)] = 0.0;
  pq.emplace(0.0, dst);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (const auto& inc : net.incident(u)) {
      if (detail::excluded(excluded, inc.link)) continue;
      double nd = d + net.link(inc.link).length_km;
      if (nd < dist[static_cast<std::size_t>(inc.neighbor)]) {
        dist[static_cast<std::size_t>(inc.neighbor)] = nd;
        pq.emplace(nd, inc.neighbor);
      }
    }
  }
  if (dist[static_cast<std::size_t>(src)] == inf) return std::nullopt;

  Path path;
  path.nodes.push_back(src);
  NodeId u = src;
  while (u != dst) {
    const double du = dist[static_cast<std::size_t>(u)];
    bool stepped = false;
    for (const auto& inc : net.incident(u)) {
      if (detail::excluded(excluded, inc.link)) continue;
      const double len = net.link(inc.link).length_km;
      const double dv = dist[static_cast<std::size_t>(inc.neighbor)];
      if (dv < du && detail::same_length(du, len + dv)) {
        path.links.push_back(inc.link);
        path.nodes.push_back(inc.neighbor);
        path.length_km += len;
        u = inc.neighbor;
        stepped = true;
        break;
      }
    }
    if (!stepped) throw Error(Errc::Internal, "shortest_path walk lost the distance label");
  }
  return path;
}

// Primary is the shortest path; backup is the shortest path once the
// primary's links are removed.
inline std::optional<std::pair<Path, Path>> disjoint_path_pair(const Network& net, NodeId src,
                                                               NodeId dst,
                                                               const LinkMask& excluded = {}) {
  auto primary = shortest_path(net, src, dst, excluded);
  if (!primary) return std::nullopt;
  LinkMask mask = excluded.empty() ? LinkMask(static_cast<std::size_t>(net.link_count()), false)
                                   : excluded;
  for (LinkId l : primary->links) mask[static_cast<std::size_t>(l)] = true;
  auto backup = shortest_path(net, src, dst, mask);
  if (!backup) return std::nullopt;
  return std::pair{std::move(*primary), std::move(*backup)};
}

// Relation of one link to a protection cycle.
enum class CycleRole : std::uint8_t { None = 0, OnCycle = 1, Straddling = 2 };

struct ProtectionCycle {
  std::vector<NodeId> nodes;      // canonical orientation, closing link implied
  std::vector<LinkId> links;      // links[j] joins nodes[j] and nodes[j+1 mod n]
  std::vector<std::uint8_t> pi;   // per network link: 1 if on the cycle
  std::vector<std::uint8_t> x;    // per network link: 1 on-cycle, 2 straddling, 0 otherwise

  std::size_t hops() const { return links.size(); }
  CycleRole role(LinkId l) const { return static_cast<CycleRole>(x[static_cast<std::size_t>(l)]); }

  std::size_t position(NodeId n) const {
    return static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), n) - nodes.begin());
  }
  bool contains(NodeId n) const { return position(n) < nodes.size(); }
};

// Builds a cycle from a closed node walk, rotating it into canonical
// orientation (smallest node first, smaller neighbor second).
inline ProtectionCycle make_cycle(const Network& net, std::vector<NodeId> walk) {
  if (walk.size() < 3) throw Error(Errc::Validation, "cycle needs at least 3 nodes");
  for (NodeId n : walk) net.require_node(n);
  {
    auto sorted = walk;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(Errc::Validation, "cycle repeats a node");
    }
  }
  std::rotate(walk.begin(), std::min_element(walk.begin(), walk.end()), walk.end());
  if (walk[1] > walk.back()) std::reverse(walk.begin() + 1, walk.end());

  ProtectionCycle c;
  c.nodes = std::move(walk);
  const std::size_t n = c.nodes.size();
  c.pi.assign(static_cast<std::size_t>(net.link_count()), 0);
  c.x.assign(static_cast<std::size_t>(net.link_count()), 0);
  for (std::size_t j = 0; j < n; ++j) {
    auto l = net.link_between(c.nodes[j], c.nodes[(j + 1) % n]);
    if (!l) throw Error(Errc::Validation, "cycle walk uses a missing link");
    c.links.push_back(*l);
    c.pi[static_cast<std::size_t>(*l)] = 1;
    c.x[static_cast<std::size_t>(*l)] = 1;
  }
  for (const auto& l : net.links()) {
    if (!c.pi[static_cast<std::size_t>(l.id)] && c.contains(l.a) && c.contains(l.b)) {
      c.x[static_cast<std::size_t>(l.id)] = 2;
    }
  }
  return c;
}

// All simple cycles with at most `max_hops` links, each once, sorted by
// canonical node sequence.
inline std::vector<ProtectionCycle> enumerate_cycles(const Network& net, int max_hops) {
  if (max_hops < 3) throw Error(Errc::Precondition, "max_hops must be at least 3");
  std::vector<std::vector<NodeId>> walks;
  std::vector<NodeId> walk;
  std::vector<bool> on_walk(static_cast<std::size_t>(net.node_count()), false);

  auto dfs = [&](auto&& self, NodeId start, NodeId u) -> void {
    for (const auto& inc : net.incident(u)) {
      const NodeId v = inc.neighbor;
      if (v == start) {
        if (walk.size() >= 3 && walk[1] < walk.back()) walks.push_back(walk);
        continue;
      }
      if (v < start || on_walk[static_cast<std::size_t>(v)]) continue;
      if (static_cast<int>(walk.size()) >= max_hops) continue;
      walk.push_back(v);
      on_walk[static_cast<std::size_t>(v)] = true;
      self(self, start, v);
      on_walk[static_cast<std::size_t>(v)] = false;
      walk.pop_back();
    }
  };

  for (NodeId s = 0; s < net.node_count(); ++s) {
    walk.assign(1, s);
    on_walk[static_cast<std::size_t>(s)] = true;
    dfs(dfs, s, s);
    on_walk[static_cast<std::size_t>(s)] = false;
  }
  std::sort(walks.begin(), walks.end());

  std::vector<ProtectionCycle> cycles;
  cycles.reserve(walks.size());
  for (auto& w : walks) cycles.push_back(make_cycle(net, std::move(w)));
  return cycles;
}

// Surviving cycle routes between the endpoints of `failed`.
//
// On-cycle: the failed link joins nodes[j] and nodes[j+1]; the single route
// runs from nodes[j+1] forward around the cycle back to nodes[j].
// Straddling: both arcs, starting from the endpoint that comes first in the
// cycle's node order, lexicographically smaller node sequence first.
inline std::vector<Path> backup_routes(const Network& net, const ProtectionCycle& cycle,
                                       LinkId failed) {
  if (failed < 0 || failed >= net.link_count()) {
    throw Error(Errc::Precondition, "unknown link " + std::to_string(failed));
  }
  const auto role = cycle.role(failed);
  if (role == CycleRole::None) {
    throw Error(Errc::Precondition, "link " + std::to_string(failed) + " is not protected by cycle");
  }
  const std::size_t n = cycle.nodes.size();
  const auto& fl = net.link(failed);

  auto walk = [&](std::size_t from, std::size_t to, bool forward) {
    Path p;
    std::size_t at = from;
    p.nodes.push_back(cycle.nodes[at]);
    while (at != to) {
      std::size_t next = forward ? (at + 1) % n : (at + n - 1) % n;
      LinkId l = cycle.links[forward ? at : next];
      p.links.push_back(l);
      p.nodes.push_back(cycle.nodes[next]);
      p.length_km += net.link(l).length_km;
      at = next;
    }
    return p;
  };

  if (role == CycleRole::OnCycle) {
    std::size_t j = static_cast<std::size_t>(
        std::find(cycle.links.begin(), cycle.links.end(), failed) - cycle.links.begin());
    return {walk((j + 1) % n, j, true)};
  }

  std::size_t pa = cycle.position(fl.a);
  std::size_t pb = cycle.position(fl.b);
  if (pa > pb) std::swap(pa, pb);
  std::vector<Path> routes{walk(pa, pb, true), walk(pa, pb, false)};
  std::sort(routes.begin(), routes.end(),
            [](const Path& x, const Path& y) { return x.nodes < y.nodes; });
  return routes;
}

}  // namespace pwcg
