#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "relmax/common.hpp"
#include "relmax/estimators.hpp"
#include "relmax/graph.hpp"
#include "relmax/paths.hpp"

namespace relmax {

/// A missing edge eligible for insertion ("red" edge).
struct CandidateEdge {
  CandidateId id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  double prob = 0.0;

  ProbEdge as_edge() const { return {src, dst, prob}; }
  friend bool operator==(const CandidateEdge&, const CandidateEdge&) = default;
};

/// Reduced candidate edge set E+. Ids are stable: pruning keeps the ids of
/// the survivors so path annotations stay valid.
struct CandidateSet {
  std::vector<CandidateEdge> edges;
  std::vector<NodeId> from_source;  // C(s), or the union over all sources
  std::vector<NodeId> to_target;    // C(t), or the union over all targets
  int h = 0;
  bool r_clamped = false;

  std::size_t size() const noexcept { return edges.size(); }
  bool empty() const noexcept { return edges.empty(); }

  const CandidateEdge& at(CandidateId id) const {
    auto it = std::lower_bound(edges.begin(), edges.end(), id,
                               [](const CandidateEdge& e, CandidateId x) { return e.id < x; });
    if (it == edges.end() || it->id != id) throw InputError("unknown candidate id " + std::to_string(id));
    return *it;
  }
  bool contains(CandidateId id) const {
    return std::any_of(edges.begin(), edges.end(), [id](const CandidateEdge& e) { return e.id == id; });
  }
};

/// Per-pair probabilities for candidate edges, replacing the uniform zeta.
class ProbOverrides {
 public:
  explicit ProbOverrides(bool directed = true) : directed_(directed) {}

  void set(NodeId u, NodeId v, double p) { map_[key(u, v)] = p; }
  std::optional<double> get(NodeId u, NodeId v) const {
    auto it = map_.find(key(u, v));
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }
  bool empty() const noexcept { return map_.empty(); }

  std::vector<ProbEdge> entries() const {
    std::vector<ProbEdge> out;
    for (auto [k, p] : map_) out.push_back({static_cast<NodeId>(k >> 32), static_cast<NodeId>(k & 0xffffffffu), p});
    return out;
  }

 private:
  std::uint64_t key(NodeId u, NodeId v) const {
    if (!directed_ && v < u) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | v;
  }
  bool directed_;
  std::map<std::uint64_t, double> map_;
};

/// Reads `src dst prob` lines against the node labels of `g`.
inline ProbOverrides load_prob_overrides(const std::string& path, const UncertainGraph& g) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open override file '" + path + "'");
  ProbOverrides out(g.directed());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tok = detail::split_ws(view);
    if (tok.empty()) continue;
    const auto where = path + ": line " + std::to_string(lineno) + ": ";
    if (tok.size() != 3) throw InputError(where + "expected 'src dst prob'");
    const auto p = detail::parse_double(tok[2]);
    if (!p || !(*p >= 0.0 && *p <= 1.0)) throw InputError(where + "bad probability");
    const auto u = g.names().find(tok[0]);
    const auto v = g.names().find(tok[1]);
    if (!u || !v) throw InputError(where + "unknown node label");
    if (*u == *v) throw InputError(where + "self loop");
    out.set(*u, *v, *p);
  }
  return out;
}

struct EliminationParams {
  std::size_t r = 100;
  int h = 3;
  double zeta = 0.5;
  // Hop constraint measured on the undirected skeleton unless set.
  bool directed_hops = false;
  // Ranking estimator for C(s)/C(t): method (mc or rss), samples, seed.
  EstimatorConfig estimator{Method::rss, 250, 1};
  const ProbOverrides* overrides = nullptr;
  std::vector<std::string>* warnings = nullptr;
};

namespace detail {

// Top-r node ids by score (ties by id), restricted to positive scores;
// `forced` is always included, evicting the r-th entry if needed.
inline std::vector<NodeId> top_r_nodes(const std::vector<double>& score, std::size_t r, NodeId forced) {
  std::vector<NodeId> order;
  for (NodeId v = 0; v < score.size(); ++v) {
    if (score[v] > 0.0 || v == forced) order.push_back(v);
  }
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return score[a] != score[b] ? score[a] > score[b] : a < b;
  });
  if (order.size() > r) order.resize(r);
  if (std::find(order.begin(), order.end(), forced) == order.end()) {
    if (order.size() == r && !order.empty()) order.pop_back();
    order.insert(order.begin(), forced);
  }
  std::sort(order.begin(), order.end());
  return order;
}

inline CandidateSet build_candidates(const UncertainGraph& g, std::vector<NodeId> from, std::vector<NodeId> to,
                                     int h, double zeta, bool directed_hops, const ProbOverrides* overrides) {
  CandidateSet cs;
  cs.h = h;
  std::sort(from.begin(), from.end());
  from.erase(std::unique(from.begin(), from.end()), from.end());
  std::sort(to.begin(), to.end());
  to.erase(std::unique(to.begin(), to.end()), to.end());
  std::unordered_set<NodeId> targets(to.begin(), to.end());
  std::set<std::pair<NodeId, NodeId>> seen;
  for (NodeId u : from) {
    std::unordered_set<NodeId> near;
    if (h > 0) {
      for (auto [v, d] : hop_ball(g, u, h, !directed_hops)) {
        if (targets.count(v)) near.insert(v);
      }
    }
    for (NodeId v : to) {
      if (u == v || (h > 0 && !near.count(v)) || g.has_edge(u, v)) continue;
      auto key = g.directed() ? std::make_pair(u, v) : std::make_pair(std::min(u, v), std::max(u, v));
      if (!seen.insert(key).second) continue;
      double p = zeta;
      if (overrides) {
        if (auto o = overrides->get(u, v)) p = *o;
      }
      cs.edges.push_back({0, u, v, p});
    }
  }
  for (CandidateId i = 0; i < cs.edges.size(); ++i) cs.edges[i].id = i;
  cs.from_source = std::move(from);
  cs.to_target = std::move(to);
  return cs;
}

}  // namespace detail

/// Search-space elimination for a set of sources and targets: C(s) are the
/// top-r nodes by reliability from each s, C(t) the top-r by reliability to
/// each t; candidates are the missing (u, v), u in ∪C(s), v in ∪C(t), within
/// h hops of each other in the base graph.
inline CandidateSet eliminate_multi(const UncertainGraph& g, std::span<const NodeId> sources,
                                    std::span<const NodeId> targets, const EliminationParams& params) {
  if (params.r < 1) throw InputError("r must be at least 1");
  if (params.h < 1) throw InputError("h must be at least 1");
  if (!(params.zeta > 0.0 && params.zeta <= 1.0)) throw InputError("zeta must lie in (0, 1]");
  if (sources.empty() || targets.empty()) throw InputError("need at least one source and one target");
  std::size_t r = params.r;
  bool clamped = false;
  if (r > g.node_count()) {
    r = g.node_count();
    clamped = true;
    if (params.warnings) params.warnings->push_back("r exceeds node count; clamped to " + std::to_string(r));
  }
  const auto& est = params.estimator;
  const Method rank_method = est.method == Method::mc ? Method::mc : Method::rss;
  std::vector<NodeId> from, to;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto rel = reliability_all_from(g, sources[i], est.samples, rng::derive(est.seed, 2 * i), rank_method, est);
    auto top = detail::top_r_nodes(rel, r, sources[i]);
    from.insert(from.end(), top.begin(), top.end());
  }
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const auto rel = reliability_all_to(g, targets[j], est.samples, rng::derive(est.seed, 2 * j + 1), rank_method, est);
    auto top = detail::top_r_nodes(rel, r, targets[j]);
    to.insert(to.end(), top.begin(), top.end());
  }
  auto cs = detail::build_candidates(g, std::move(from), std::move(to), params.h, params.zeta, params.directed_hops,
                                     params.overrides);
  cs.r_clamped = clamped;
  return cs;
}

inline CandidateSet eliminate(const UncertainGraph& g, NodeId s, NodeId t, const EliminationParams& params) {
  const NodeId src[] = {s};
  const NodeId dst[] = {t};
  return eliminate_multi(g, src, dst, params);
}

/// Every missing pair within h hops (any distance when h <= 0), each at
/// zeta or its override.
inline CandidateSet all_missing_candidates(const UncertainGraph& g, double zeta, int h,
                                           const ProbOverrides* overrides = nullptr, bool directed_hops = false) {
  std::vector<NodeId> all(g.node_count());
  std::iota(all.begin(), all.end(), NodeId{0});
  return detail::build_candidates(g, all, all, h, zeta, directed_hops, overrides);
}

/// Candidate set given explicitly; each edge must be absent from `g`.
inline CandidateSet explicit_candidates(const UncertainGraph& g, std::span<const ProbEdge> edges) {
  CandidateSet cs;
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& e : edges) {
    if (e.src >= g.node_count() || e.dst >= g.node_count()) throw InputError("candidate endpoint out of range");
    if (e.src == e.dst) throw InputError("candidate self loop");
    if (g.has_edge(e.src, e.dst)) {
      throw InputError("candidate " + g.names().label(e.src) + " " + g.names().label(e.dst) + " already exists");
    }
    if (!(e.prob >= 0.0 && e.prob <= 1.0)) throw InputError("candidate probability outside [0,1]");
    auto key = g.directed() ? std::make_pair(e.src, e.dst) : std::make_pair(std::min(e.src, e.dst), std::max(e.src, e.dst));
    if (!seen.insert(key).second) throw InputError("duplicate candidate edge");
    cs.edges.push_back({static_cast<CandidateId>(cs.edges.size()), e.src, e.dst, e.prob});
    cs.from_source.push_back(e.src);
    cs.to_target.push_back(e.dst);
  }
  for (auto* v : {&cs.from_source, &cs.to_target}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  return cs;
}

/// Reads a candidate list (`src dst prob` lines, file order kept) for `g`.
inline CandidateSet load_candidates(const std::string& path, const UncertainGraph& g) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open candidate file '" + path + "'");
  std::vector<ProbEdge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tok = detail::split_ws(view);
    if (tok.empty()) continue;
    const auto where = path + ": line " + std::to_string(lineno) + ": ";
    const auto p = tok.size() == 3 ? detail::parse_double(tok[2]) : std::nullopt;
    if (!p) throw InputError(where + "expected 'src dst prob'");
    const auto u = g.names().find(tok[0]);
    const auto v = g.names().find(tok[1]);
    if (!u || !v) throw InputError(where + "unknown node label");
    edges.push_back({*u, *v, *p});
  }
  return explicit_candidates(g, edges);
}

/// Drops candidates that lie on none of `paths`; survivors keep their ids.
inline CandidateSet prune_by_paths(const CandidateSet& cands, std::span<const ReliablePath> paths) {
  std::unordered_set<CandidateId> used;
  for (const auto& p : paths) used.insert(p.candidates.begin(), p.candidates.end());
  CandidateSet out = cands;
  out.edges.clear();
  for (const auto& e : cands.edges) {
    if (used.count(e.id)) out.edges.push_back(e);
  }
  return out;
}

/// Base graph plus every candidate, with the edge→candidate mapping.
struct AugmentedGraph {
  UncertainGraph graph;
  CandidateMap map;
};

inline AugmentedGraph augment(const UncertainGraph& g, const CandidateSet& cands) {
  std::vector<ProbEdge> extra;
  AugmentedGraph out;
  out.map.base_edges = g.edge_count();
  for (const auto& c : cands.edges) {
    if (c.prob <= 0.0) continue;
    extra.push_back(c.as_edge());
    out.map.ids.push_back(c.id);
  }
  out.graph = with_edges(g, extra);
  return out;
}

inline UncertainGraph with_candidates(const UncertainGraph& g, std::span<const CandidateEdge> chosen) {
  std::vector<ProbEdge> extra;
  for (const auto& c : chosen) extra.push_back(c.as_edge());
  return with_edges(g, extra);
}

}  // namespace relmax
