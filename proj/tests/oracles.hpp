#pragma once

// Test-side reference implementations. They work from plain edge lists and
// deliberately share no code with the library beyond the value types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "relmax/relmax.hpp"

namespace oracle {

struct Edge {
  unsigned u, v;
  double p;
  bool candidate = false;
  unsigned cand_id = 0;
};

inline std::vector<Edge> edges_of(const relmax::UncertainGraph& g) {
  std::vector<Edge> out;
  for (const auto& e : g.edges()) out.push_back({e.src, e.dst, e.prob});
  return out;
}

inline std::vector<Edge> with_candidates(std::vector<Edge> base, const relmax::CandidateSet& cands) {
  for (const auto& c : cands.edges) base.push_back({c.src, c.dst, c.prob, true, c.id});
  return base;
}

// Sum over all 2^m worlds of Pr(world) * [t reachable from s].
inline double reliability(unsigned n, const std::vector<Edge>& edges, bool directed, unsigned s, unsigned t) {
  if (s == t) return 1.0;
  const std::size_t m = edges.size();
  if (m > 24) throw std::runtime_error("oracle: too many edges");
  double total = 0.0;
  std::vector<std::vector<unsigned>> adj(n);
  std::vector<char> seen(n);
  std::vector<unsigned> stack;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    double pr = 1.0;
    for (auto& a : adj) a.clear();
    for (std::size_t i = 0; i < m; ++i) {
      const bool on = (mask >> i) & 1u;
      pr *= on ? edges[i].p : 1.0 - edges[i].p;
      if (on) {
        adj[edges[i].u].push_back(edges[i].v);
        if (!directed) adj[edges[i].v].push_back(edges[i].u);
      }
    }
    if (pr == 0.0) continue;
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(1, s);
    seen[s] = 1;
    bool hit = false;
    while (!stack.empty() && !hit) {
      const unsigned x = stack.back();
      stack.pop_back();
      for (unsigned y : adj[x]) {
        if (seen[y]) continue;
        if (y == t) {
          hit = true;
          break;
        }
        seen[y] = 1;
        stack.push_back(y);
      }
    }
    if (hit) total += pr;
  }
  return total;
}

inline double reliability(const relmax::UncertainGraph& g, unsigned s, unsigned t) {
  return reliability(static_cast<unsigned>(g.node_count()), edges_of(g), g.directed(), s, t);
}

struct Path {
  std::vector<unsigned> nodes;
  double prob = 1.0;
  std::vector<unsigned> cands;  // candidate ids used, sorted
};

// Every simple s-t path.
inline std::vector<Path> simple_paths(unsigned n, const std::vector<Edge>& edges, bool directed, unsigned s,
                                      unsigned t) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    adj[edges[i].u].push_back(i);
    if (!directed) adj[edges[i].v].push_back(i);
  }
  std::vector<Path> out;
  std::vector<char> on(n, 0);
  Path cur;
  std::function<void(unsigned)> dfs = [&](unsigned x) {
    if (x == t) {
      Path p = cur;
      std::sort(p.cands.begin(), p.cands.end());
      out.push_back(p);
      return;
    }
    for (std::size_t i : adj[x]) {
      const auto& e = edges[i];
      const unsigned y = e.u == x ? e.v : e.u;
      if (on[y] || e.p <= 0.0) continue;
      on[y] = 1;
      cur.nodes.push_back(y);
      const double saved = cur.prob;
      cur.prob *= e.p;
      if (e.candidate) cur.cands.push_back(e.cand_id);
      dfs(y);
      if (e.candidate) cur.cands.pop_back();
      cur.prob = saved;
      cur.nodes.pop_back();
      on[y] = 0;
    }
  };
  on[s] = 1;
  cur.nodes = {s};
  dfs(s);
  return out;
}

// Best simple-path probability using at most k candidate edges (0 if none).
inline double best_path_with_budget(const std::vector<Path>& paths, std::size_t k) {
  double best = 0.0;
  for (const auto& p : paths) {
    if (p.cands.size() <= k) best = std::max(best, p.prob);
  }
  return best;
}

// Optimal subset of exactly min(k, q) candidates by exact reliability.
inline std::pair<double, std::vector<unsigned>> best_subset(const relmax::UncertainGraph& g,
                                                            const relmax::CandidateSet& cands, unsigned s,
                                                            unsigned t, std::size_t k) {
  const auto base = edges_of(g);
  const std::size_t q = cands.size();
  const std::size_t size = std::min(k, q);
  double best = -1.0;
  std::vector<unsigned> arg;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << q); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != size) continue;
    auto edges = base;
    std::vector<unsigned> ids;
    for (std::size_t i = 0; i < q; ++i) {
      if ((mask >> i) & 1u) {
        const auto& c = cands.edges[i];
        edges.push_back({c.src, c.dst, c.prob});
        ids.push_back(c.id);
      }
    }
    const double r = reliability(static_cast<unsigned>(g.node_count()), edges, g.directed(), s, t);
    if (r > best + 1e-12) {
      best = r;
      arg = ids;
    }
  }
  return {best, arg};
}

// Random simple graph with exactly m edges, probabilities uniform in [lo, hi].
inline relmax::UncertainGraph random_graph(unsigned n, std::size_t m, bool directed, std::uint64_t seed,
                                           double lo = 0.1, double hi = 0.9) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<unsigned> node(0, n - 1);
  std::uniform_real_distribution<double> prob(lo, hi);
  std::set<std::pair<unsigned, unsigned>> used;
  std::vector<relmax::ProbEdge> edges;
  const std::size_t max_m = directed ? std::size_t{n} * (n - 1) : std::size_t{n} * (n - 1) / 2;
  m = std::min(m, max_m);
  while (edges.size() < m) {
    unsigned a = node(gen), b = node(gen);
    if (a == b) continue;
    auto key = directed ? std::make_pair(a, b) : std::make_pair(std::min(a, b), std::max(a, b));
    if (!used.insert(key).second) continue;
    edges.push_back({a, b, prob(gen)});
  }
  return relmax::UncertainGraph(relmax::NodeTable::numbered(n), directed, std::move(edges));
}

// Candidate set of `q` random missing pairs at probability zeta.
inline relmax::CandidateSet random_candidates(const relmax::UncertainGraph& g, std::size_t q, double zeta,
                                              std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const auto n = static_cast<unsigned>(g.node_count());
  std::uniform_int_distribution<unsigned> node(0, n - 1);
  std::set<std::pair<unsigned, unsigned>> used;
  std::vector<relmax::ProbEdge> list;
  for (int tries = 0; list.size() < q && tries < 10000; ++tries) {
    unsigned a = node(gen), b = node(gen);
    if (a == b || g.has_edge(a, b)) continue;
    auto key = g.directed() ? std::make_pair(a, b) : std::make_pair(std::min(a, b), std::max(a, b));
    if (!used.insert(key).second) continue;
    list.push_back({a, b, zeta});
  }
  return relmax::explicit_candidates(g, list);
}

}  // namespace oracle
