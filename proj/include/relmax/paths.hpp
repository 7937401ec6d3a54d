#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "relmax/common.hpp"
#include "relmax/graph.hpp"

namespace relmax {

/// Maps edges of an augmented graph back to candidate ids. Edges with id
/// below `base_edges` are original; edge base_edges + i is candidate ids[i].
struct CandidateMap {
  std::size_t base_edges = std::numeric_limits<std::size_t>::max();
  std::vector<CandidateId> ids;

  std::optional<CandidateId> of(EdgeId e) const {
    if (e < base_edges) return std::nullopt;
    return ids.at(e - base_edges);
  }
};

struct ReliablePath {
  std::vector<NodeId> nodes;
  std::vector<EdgeId> edges;
  double prob = 1.0;
  double weight = 0.0;  // sum of -log p(e)
  std::vector<CandidateId> candidates;  // sorted, unique

  std::size_t hops() const noexcept { return edges.size(); }
  friend bool operator==(const ReliablePath& a, const ReliablePath& b) { return a.nodes == b.nodes; }
};

inline constexpr std::size_t kMaxPathCount = 1000;

namespace detail {

inline bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// Path order: higher probability (lower weight), then fewer hops, then the
// lexicographically smaller node sequence.
inline bool path_before(const ReliablePath& a, const ReliablePath& b) {
  if (!nearly_equal(a.weight, b.weight)) return a.weight < b.weight;
  if (a.hops() != b.hops()) return a.hops() < b.hops();
  return a.nodes < b.nodes;
}

struct PathOrder {
  bool operator()(const ReliablePath& a, const ReliablePath& b) const { return path_before(a, b); }
};

inline ReliablePath make_path(const UncertainGraph& g, std::vector<NodeId> nodes, std::vector<EdgeId> edges,
                              const CandidateMap& map) {
  ReliablePath p;
  p.nodes = std::move(nodes);
  p.edges = std::move(edges);
  for (EdgeId e : p.edges) {
    const double pr = g.edge(e).prob;
    p.prob *= pr;
    p.weight += -std::log(pr);
    if (auto c = map.of(e)) p.candidates.push_back(*c);
  }
  std::sort(p.candidates.begin(), p.candidates.end());
  p.candidates.erase(std::unique(p.candidates.begin(), p.candidates.end()), p.candidates.end());
  return p;
}

// Dijkstra under w(e) = -log p(e) with reusable, stamp-invalidated state.
class ReliabilityDijkstra {
 public:
  explicit ReliabilityDijkstra(const UncertainGraph& g)
      : g_(g), stamp_(g.node_count(), 0), dist_(g.node_count()), hops_(g.node_count()),
        pred_(g.node_count()), pred_edge_(g.node_count()), done_(g.node_count(), 0),
        node_block_(g.node_count(), 0), edge_block_(g.edge_count(), 0) {}

  void block_node(NodeId v) { node_block_[v] = block_epoch_; }
  void block_edge(EdgeId e) { edge_block_[e] = block_epoch_; }
  void clear_blocks() { ++block_epoch_; }

  // Most reliable s→t path avoiding blocked nodes/edges.
  std::optional<std::pair<std::vector<NodeId>, std::vector<EdgeId>>> run(NodeId s, NodeId t) {
    ++epoch_;
    using Item = std::pair<double, std::pair<std::size_t, NodeId>>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    touch(s);
    dist_[s] = 0.0;
    hops_[s] = 0;
    pred_[s] = kNoNode;
    heap.push({0.0, {0, s}});
    while (!heap.empty()) {
      const auto [d, rest] = heap.top();
      heap.pop();
      const NodeId u = rest.second;
      if (done_[u] == epoch_ || d != dist_[u] || rest.first != hops_[u]) continue;
      done_[u] = epoch_;
      if (u == t) break;
      for (const Arc& a : g_.out(u)) {
        const NodeId v = a.to;
        if (node_block_[v] == block_epoch_ || edge_block_[a.edge] == block_epoch_ || done_[v] == epoch_) continue;
        const double p = g_.edge(a.edge).prob;
        if (p <= 0.0) continue;
        const double nd = d - std::log(p);
        const std::size_t nh = hops_[u] + 1;
        bool better;
        if (stamp_[v] != epoch_) {
          better = true;
        } else if (!nearly_equal(nd, dist_[v])) {
          better = nd < dist_[v];
        } else if (nh != hops_[v]) {
          better = nh < hops_[v];
        } else {
          better = pred_[v] != u && lex_less(u, pred_[v]);
        }
        if (!better) continue;
        touch(v);
        dist_[v] = nd;
        hops_[v] = nh;
        pred_[v] = u;
        pred_edge_[v] = a.edge;
        heap.push({nd, {nh, v}});
      }
    }
    if (stamp_[t] != epoch_ || done_[t] != epoch_) return std::nullopt;
    std::vector<NodeId> nodes;
    std::vector<EdgeId> edges;
    for (NodeId v = t; v != s; v = pred_[v]) {
      nodes.push_back(v);
      edges.push_back(pred_edge_[v]);
    }
    nodes.push_back(s);
    std::reverse(nodes.begin(), nodes.end());
    std::reverse(edges.begin(), edges.end());
    return std::make_pair(std::move(nodes), std::move(edges));
  }

 private:
  void touch(NodeId v) { stamp_[v] = epoch_; }

  std::vector<NodeId> trail(NodeId v) const {
    std::vector<NodeId> seq;
    for (; v != kNoNode; v = pred_[v]) seq.push_back(v);
    std::reverse(seq.begin(), seq.end());
    return seq;
  }
  // Compares the settled paths ending at a and b (equal hop counts).
  bool lex_less(NodeId a, NodeId b) const { return trail(a) < trail(b); }

  const UncertainGraph& g_;
  std::vector<std::uint32_t> stamp_;
  std::vector<double> dist_;
  std::vector<std::size_t> hops_;
  std::vector<NodeId> pred_;
  std::vector<EdgeId> pred_edge_;
  std::vector<std::uint32_t> done_;
  std::vector<std::uint32_t> node_block_, edge_block_;
  std::uint32_t epoch_ = 0;
  std::uint32_t block_epoch_ = 1;
};

}  // namespace detail

/// Maximum-probability s→t path, or nullopt when t is unreachable.
inline std::optional<ReliablePath> most_reliable_path(const UncertainGraph& g, NodeId s, NodeId t,
                                                      const CandidateMap& map = {}) {
  if (s >= g.node_count() || t >= g.node_count()) throw InputError("query node out of range");
  if (s == t) return detail::make_path(g, {s}, {}, map);
  detail::ReliabilityDijkstra dj(g);
  auto found = dj.run(s, t);
  if (!found) return std::nullopt;
  return detail::make_path(g, std::move(found->first), std::move(found->second), map);
}

/// The l most reliable simple s→t paths in non-increasing probability order
/// (Yen's deviation scheme). Fewer are returned when fewer exist.
inline std::vector<ReliablePath> top_l_paths(const UncertainGraph& g, NodeId s, NodeId t, std::size_t l,
                                             const CandidateMap& map = {}) {
  if (l < 1) throw InputError("l must be at least 1");
  if (l > kMaxPathCount) throw InputError("l exceeds the path cap of " + std::to_string(kMaxPathCount));
  if (s >= g.node_count() || t >= g.node_count()) throw InputError("query node out of range");
  std::vector<ReliablePath> accepted;
  if (s == t) {
    accepted.push_back(detail::make_path(g, {s}, {}, map));
    return accepted;
  }
  detail::ReliabilityDijkstra dj(g);
  auto first = dj.run(s, t);
  if (!first) return accepted;
  accepted.push_back(detail::make_path(g, std::move(first->first), std::move(first->second), map));

  std::set<ReliablePath, detail::PathOrder> pending;
  std::set<std::vector<NodeId>> known{accepted.front().nodes};
  while (accepted.size() < l) {
    const ReliablePath prev = accepted.back();
    for (std::size_t i = 0; i + 1 < prev.nodes.size(); ++i) {
      const NodeId spur = prev.nodes[i];
      dj.clear_blocks();
      for (const auto& p : accepted) {
        if (p.nodes.size() > i + 1 && std::equal(p.nodes.begin(), p.nodes.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                                 prev.nodes.begin())) {
          dj.block_edge(p.edges[i]);
        }
      }
      for (std::size_t j = 0; j < i; ++j) dj.block_node(prev.nodes[j]);
      auto tail = dj.run(spur, t);
      if (!tail) continue;
      std::vector<NodeId> nodes(prev.nodes.begin(), prev.nodes.begin() + static_cast<std::ptrdiff_t>(i));
      std::vector<EdgeId> edges(prev.edges.begin(), prev.edges.begin() + static_cast<std::ptrdiff_t>(i));
      nodes.insert(nodes.end(), tail->first.begin(), tail->first.end());
      edges.insert(edges.end(), tail->second.begin(), tail->second.end());
      if (known.count(nodes)) continue;
      known.insert(nodes);
      pending.insert(detail::make_path(g, std::move(nodes), std::move(edges), map));
    }
    if (pending.empty()) break;
    accepted.push_back(*pending.begin());
    pending.erase(pending.begin());
  }
  return accepted;
}

}  // namespace relmax
