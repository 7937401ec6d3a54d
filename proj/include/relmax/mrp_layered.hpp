#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relmax/candidates.hpp"
#include "relmax/common.hpp"
#include "relmax/graph.hpp"

namespace relmax {

/// k+1 stacked copies of the graph. Existing edges stay inside a layer,
/// candidate edges lead from layer i to layer i+1, so reaching t in layer i
/// means exactly i candidate edges were used.
class LayeredGraph {
 public:
  LayeredGraph(const UncertainGraph& g, const CandidateSet& cands, int k) : g_(g), cands_(cands), k_(k) {
    if (k < 0) throw InputError("k must be non-negative");
    const std::size_t n = g.node_count();
    offsets_.assign(n + 1, 0);
    for (const auto& c : cands.edges) {
      if (c.prob <= 0.0) continue;
      ++offsets_[c.src + 1];
      if (!g.directed()) ++offsets_[c.dst + 1];
    }
    for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] += offsets_[v];
    red_.resize(offsets_[n]);
    auto fill = offsets_;
    for (std::uint32_t i = 0; i < cands.edges.size(); ++i) {
      const auto& c = cands.edges[i];
      if (c.prob <= 0.0) continue;
      red_[fill[c.src]++] = {c.dst, i};
      if (!g.directed()) red_[fill[c.dst]++] = {c.src, i};
    }
  }

  int k() const noexcept { return k_; }
  std::size_t node_count() const noexcept { return static_cast<std::size_t>(k_ + 1) * g_.node_count(); }
  std::size_t state(NodeId v, int layer) const noexcept {
    return static_cast<std::size_t>(layer) * g_.node_count() + v;
  }
  NodeId node_of(std::size_t state) const noexcept { return static_cast<NodeId>(state % g_.node_count()); }
  int layer_of(std::size_t state) const noexcept { return static_cast<int>(state / g_.node_count()); }

  // f(next_state, weight, red, index): index is an edge id for blue arcs and
  // a position in cands.edges for red ones.
  template <class F>
  void for_each_arc(std::size_t st, F&& f) const {
    const NodeId u = node_of(st);
    const int layer = layer_of(st);
    for (const Arc& a : g_.out(u)) {
      const double p = g_.edge(a.edge).prob;
      if (p > 0.0) f(state(a.to, layer), -std::log(p), false, a.edge);
    }
    if (layer >= k_) return;
    for (std::size_t i = offsets_[u]; i < offsets_[u + 1]; ++i) {
      const auto [v, c] = red_[i];
      f(state(v, layer + 1), -std::log(cands_.edges[c].prob), true, c);
    }
  }

  const UncertainGraph& base() const noexcept { return g_; }
  const CandidateSet& candidates() const noexcept { return cands_; }

 private:
  const UncertainGraph& g_;
  const CandidateSet& cands_;
  int k_;
  std::vector<std::size_t> offsets_;
  std::vector<std::pair<NodeId, std::uint32_t>> red_;
};

struct MrpImprovement {
  std::vector<CandidateEdge> chosen;
  std::vector<NodeId> path;  // most reliable s-t path after insertion
  double base_prob = 0.0;    // MRP probability of the original graph
  double new_prob = 0.0;
  bool unreachable = false;  // t unreachable even with every candidate
  std::vector<double> layer_prob;  // best path probability using exactly i candidates
};

/// Most-reliable-path improvement: the at most k candidates whose insertion
/// maximizes the probability of the most reliable s-t path.
inline MrpImprovement improve_mrp(const UncertainGraph& g, const CandidateSet& cands, NodeId s, NodeId t, int k) {
  if (k < 1) throw InputError("k must be at least 1");
  if (s >= g.node_count() || t >= g.node_count()) throw InputError("query node out of range");
  MrpImprovement out;
  if (s == t) {
    out.path = {s};
    out.base_prob = out.new_prob = 1.0;
    out.layer_prob.assign(static_cast<std::size_t>(k) + 1, 0.0);
    out.layer_prob[0] = 1.0;
    return out;
  }
  LayeredGraph lg(g, cands, k);
  const std::size_t N = lg.node_count();
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<double> dist(N, inf);
  std::vector<std::size_t> pred(N, none);
  std::vector<std::uint32_t> via(N, 0);
  std::vector<char> via_red(N, 0), done(N, 0);

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[lg.state(s, 0)] = 0.0;
  heap.push({0.0, lg.state(s, 0)});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    lg.for_each_arc(u, [&](std::size_t v, double w, bool red, std::uint32_t idx) {
      const double nd = d + w;
      if (done[v] || !(nd < dist[v])) return;
      dist[v] = nd;
      pred[v] = u;
      via[v] = idx;
      via_red[v] = red;
      heap.push({nd, v});
    });
  }

  out.layer_prob.resize(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) out.layer_prob[i] = std::exp(-dist[lg.state(t, i)]);
  const double w0 = dist[lg.state(t, 0)];
  out.base_prob = std::exp(-w0);

  int best = 0;
  for (int i = 1; i <= k; ++i) {
    if (dist[lg.state(t, i)] < dist[lg.state(t, best)]) best = i;
  }
  if (dist[lg.state(t, best)] == inf) {
    out.unreachable = true;
    return out;
  }

  // Walk back, then cut any loop through a node visited in two layers.
  struct Step {
    NodeId node;
    bool red;
    std::uint32_t idx;
  };
  std::vector<Step> walk;
  for (std::size_t st = lg.state(t, best); st != none; st = pred[st]) {
    walk.push_back({lg.node_of(st), static_cast<bool>(via_red[st]), via[st]});
  }
  std::reverse(walk.begin(), walk.end());
  std::vector<Step> simple;
  std::unordered_map<NodeId, std::size_t> pos;
  for (const auto& step : walk) {
    if (auto it = pos.find(step.node); it != pos.end()) {
      while (simple.size() > it->second + 1) {
        pos.erase(simple.back().node);
        simple.pop_back();
      }
      // The kept step into this node is the earlier one.
      continue;
    }
    pos[step.node] = simple.size();
    simple.push_back(step);
  }

  double prob = 1.0;
  for (std::size_t i = 0; i < simple.size(); ++i) {
    out.path.push_back(simple[i].node);
    if (i == 0) continue;
    if (simple[i].red) {
      const auto& c = cands.edges[simple[i].idx];
      prob *= c.prob;
      out.chosen.push_back(c);
    } else {
      prob *= g.edge(simple[i].idx).prob;
    }
  }
  out.new_prob = prob;
  if (out.chosen.empty()) out.base_prob = prob;
  std::sort(out.chosen.begin(), out.chosen.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

/// Candidate set for the full construction: every missing pair, no hop limit.
inline CandidateSet complete_candidates(const UncertainGraph& g, double zeta,
                                        const ProbOverrides* overrides = nullptr) {
  return all_missing_candidates(g, zeta, 0, overrides);
}

inline constexpr std::size_t kFullLayeredNodeLimit = 2000;

}  // namespace relmax
