#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "relmax/common.hpp"
#include "relmax/graph.hpp"

namespace relmax {

enum class Family { erdos_renyi, k_regular, small_world, scale_free };

inline Family parse_family(const std::string& s) {
  if (s == "erdos_renyi" || s == "er") return Family::erdos_renyi;
  if (s == "k_regular" || s == "regular") return Family::k_regular;
  if (s == "small_world" || s == "ws") return Family::small_world;
  if (s == "scale_free" || s == "ba") return Family::scale_free;
  throw InputError("unknown graph family '" + s + "'");
}

/// 1 - exp(-t/mu): probability derived from an interaction count t.
inline double prob_from_count(double t, double mu) {
  if (!(mu > 0.0)) throw InputError("mu must be positive");
  if (t < 0.0) throw InputError("count must be non-negative");
  return -std::expm1(-t / mu);
}

struct ProbModel {
  enum class Kind { uniform, exponential_count } kind = Kind::uniform;
  double lo = 0.0;  // uniform over (lo, hi]
  double hi = 0.6;
  double mu = 20.0;             // exponential_count: count t uniform on 1..max_count
  std::uint64_t max_count = 100;

  double draw(rng::SplitMix64& gen) const {
    if (kind == Kind::uniform) return hi - gen.uniform() * (hi - lo);
    return prob_from_count(static_cast<double>(1 + gen.below(max_count)), mu);
  }
};

struct GenSpec {
  Family family = Family::erdos_renyi;
  std::size_t n = 100;
  // erdos_renyi: edge probability; k_regular: degree; small_world: rewiring
  // probability; scale_free: edges per new node (0 alternates 2 and 3).
  double param = 0.0;
  // erdos_renyi only: exact edge count G(n, m) instead of G(n, p) when > 0.
  std::size_t edges = 0;
  // small_world only: lattice degree (even).
  std::size_t degree = 4;
  bool directed = false;  // erdos_renyi only
  ProbModel prob;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<std::pair<NodeId, NodeId>> gen_erdos_renyi(const GenSpec& spec, rng::SplitMix64& gen) {
  const std::uint64_t n = spec.n;
  std::vector<std::pair<NodeId, NodeId>> out;
  const std::uint64_t pairs = spec.directed ? n * (n - 1) : n * (n - 1) / 2;
  auto decode = [&](std::uint64_t idx) -> std::pair<NodeId, NodeId> {
    if (spec.directed) {
      const auto u = idx / (n - 1), r = idx % (n - 1);
      return {static_cast<NodeId>(u), static_cast<NodeId>(r < u ? r : r + 1)};
    }
    // Row v holds pairs (v, w) with w < v; row v starts at v(v-1)/2.
    auto v = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(idx))) / 2.0);
    while (v * (v - 1) / 2 > idx) --v;
    while ((v + 1) * v / 2 <= idx) ++v;
    return {static_cast<NodeId>(idx - v * (v - 1) / 2), static_cast<NodeId>(v)};
  };
  if (spec.edges > 0) {
    if (spec.edges > pairs) throw InputError("more edges requested than node pairs");
    std::unordered_set<std::uint64_t> used;
    used.reserve(spec.edges * 2);
    while (out.size() < spec.edges) {
      const auto idx = gen.below(pairs);
      if (used.insert(idx).second) out.push_back(decode(idx));
    }
    return out;
  }
  const double p = spec.param;
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("edge probability must lie in [0,1]");
  if (p == 0.0) return out;
  if (p == 1.0) {
    for (std::uint64_t i = 0; i < pairs; ++i) out.push_back(decode(i));
    return out;
  }
  // Geometric skipping over the pair index.
  const double log_q = std::log1p(-p);
  std::uint64_t idx = 0;
  for (;;) {
    const double skip = std::floor(std::log1p(-gen.uniform()) / log_q);
    if (skip >= static_cast<double>(pairs - idx)) break;
    idx += static_cast<std::uint64_t>(skip);
    out.push_back(decode(idx));
    if (++idx >= pairs) break;
  }
  return out;
}

inline std::uint64_t pair_key(NodeId a, NodeId b) {
  if (b < a) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

inline std::vector<std::pair<NodeId, NodeId>> gen_k_regular(const GenSpec& spec, rng::SplitMix64& gen) {
  const std::size_t n = spec.n;
  const auto k = static_cast<std::size_t>(spec.param);
  if (static_cast<double>(k) != spec.param) throw InputError("degree must be an integer");
  if (k >= n) throw InputError("degree must be below the node count");
  if ((n * k) % 2 != 0) throw InputError("n*k must be even for a regular graph");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<NodeId> stubs;
    for (NodeId v = 0; v < n; ++v) stubs.insert(stubs.end(), k, v);
    std::unordered_set<std::uint64_t> used;
    std::vector<std::pair<NodeId, NodeId>> out;
    bool stuck = false;
    while (!stubs.empty() && !stuck) {
      stuck = true;
      for (int tries = 0; tries < 100; ++tries) {
        const auto i = gen.below(stubs.size());
        const auto j = gen.below(stubs.size());
        const NodeId a = stubs[i], b = stubs[j];
        if (i == j || a == b || used.count(pair_key(a, b))) continue;
        used.insert(pair_key(a, b));
        out.emplace_back(std::min(a, b), std::max(a, b));
        const auto hi = std::max(i, j), lo = std::min(i, j);
        stubs[hi] = stubs.back();
        stubs.pop_back();
        stubs[lo] = stubs.back();
        stubs.pop_back();
        stuck = false;
        break;
      }
    }
    if (!stuck) return out;
  }
  throw InfeasibleError("could not build a simple regular graph in 1000 attempts");
}

inline std::vector<std::pair<NodeId, NodeId>> gen_small_world(const GenSpec& spec, rng::SplitMix64& gen) {
  const std::size_t n = spec.n, d = spec.degree;
  const double beta = spec.param;
  if (d % 2 != 0 || d == 0 || d >= n) throw InputError("lattice degree must be even, positive and below n");
  if (!(beta >= 0.0 && beta <= 1.0)) throw InputError("rewiring probability must lie in [0,1]");
  std::unordered_set<std::uint64_t> used;
  std::vector<std::pair<NodeId, NodeId>> out;
  for (NodeId u = 0; u < n; ++u) {
    for (std::size_t j = 1; j <= d / 2; ++j) {
      const auto v = static_cast<NodeId>((u + j) % n);
      used.insert(pair_key(u, v));
      out.emplace_back(u, v);
    }
  }
  for (auto& [u, v] : out) {
    if (gen.uniform() >= beta) continue;
    // Rewire the far end to a uniformly chosen non-neighbour.
    for (int tries = 0; tries < 100; ++tries) {
      const auto w = static_cast<NodeId>(gen.below(n));
      if (w == u || used.count(pair_key(u, w))) continue;
      used.erase(pair_key(u, v));
      used.insert(pair_key(u, w));
      v = w;
      break;
    }
  }
  return out;
}

inline std::vector<std::pair<NodeId, NodeId>> gen_scale_free(const GenSpec& spec, rng::SplitMix64& gen) {
  const std::size_t n = spec.n;
  const auto m_fixed = static_cast<std::size_t>(spec.param);
  if (static_cast<double>(m_fixed) != spec.param) throw InputError("attachment count must be an integer");
  const std::size_t seed_nodes = (m_fixed == 0 ? 3 : m_fixed) + 1;
  if (n < seed_nodes) throw InputError("too few nodes for the attachment count");
  std::vector<std::pair<NodeId, NodeId>> out;
  std::vector<NodeId> ends;  // node repeated once per incident edge
  for (NodeId a = 0; a < seed_nodes; ++a) {
    for (NodeId b = a + 1; b < seed_nodes; ++b) {
      out.emplace_back(a, b);
      ends.push_back(a);
      ends.push_back(b);
    }
  }
  for (auto v = static_cast<NodeId>(seed_nodes); v < n; ++v) {
    const std::size_t m = m_fixed == 0 ? (v % 2 == 0 ? 2 : 3) : m_fixed;
    std::vector<NodeId> picked;
    while (picked.size() < m) {
      const NodeId w = ends[gen.below(ends.size())];
      if (std::find(picked.begin(), picked.end(), w) == picked.end()) picked.push_back(w);
    }
    for (NodeId w : picked) {
      out.emplace_back(w, v);
      ends.push_back(w);
      ends.push_back(v);
    }
  }
  return out;
}

}  // namespace detail

/// Synthetic uncertain graph; identical output for identical spec.
inline UncertainGraph generate(const GenSpec& spec) {
  if (spec.n < 2) throw InputError("need at least two nodes");
  if (spec.prob.kind == ProbModel::Kind::uniform &&
      !(spec.prob.lo >= 0.0 && spec.prob.lo < spec.prob.hi && spec.prob.hi <= 1.0)) {
    throw InputError("uniform probability range must satisfy 0 <= lo < hi <= 1");
  }
  if (spec.prob.kind == ProbModel::Kind::exponential_count && spec.prob.max_count < 1) {
    throw InputError("max_count must be at least 1");
  }
  if (spec.directed && spec.family != Family::erdos_renyi) {
    throw InputError("only the Erdos-Renyi family supports directed output");
  }
  rng::SplitMix64 structure(rng::derive(spec.seed, 1));
  rng::SplitMix64 probs(rng::derive(spec.seed, 2));
  std::vector<std::pair<NodeId, NodeId>> pairs;
  switch (spec.family) {
    case Family::erdos_renyi: pairs = detail::gen_erdos_renyi(spec, structure); break;
    case Family::k_regular: pairs = detail::gen_k_regular(spec, structure); break;
    case Family::small_world: pairs = detail::gen_small_world(spec, structure); break;
    case Family::scale_free: pairs = detail::gen_scale_free(spec, structure); break;
  }
  std::vector<ProbEdge> edges;
  edges.reserve(pairs.size());
  for (auto [u, v] : pairs) edges.push_back({u, v, spec.prob.draw(probs)});
  return UncertainGraph(NodeTable::numbered(spec.n), spec.directed, std::move(edges));
}

}  // namespace relmax
