#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relmax/common.hpp"

namespace relmax {

/// Bidirectional map between external node labels and dense ids 0..n-1.
class NodeTable {
 public:
  NodeId intern(std::string_view label) {
    auto it = ids_.find(std::string(label));
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<NodeId>(labels_.size());
    labels_.emplace_back(label);
    ids_.emplace(labels_.back(), id);
    return id;
  }

  std::optional<NodeId> find(std::string_view label) const {
    auto it = ids_.find(std::string(label));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  NodeId at(std::string_view label) const {
    if (auto id = find(label)) return *id;
    throw InputError("unknown node label '" + std::string(label) + "'");
  }

  const std::string& label(NodeId id) const { return labels_.at(id); }
  std::size_t size() const noexcept { return labels_.size(); }

  // Table whose labels are the decimal ids themselves.
  static NodeTable numbered(std::size_t n) {
    NodeTable t;
    for (std::size_t i = 0; i < n; ++i) t.intern(std::to_string(i));
    return t;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> ids_;
};

struct ProbEdge {
  NodeId src = 0;
  NodeId dst = 0;
  double prob = 0.0;

  friend bool operator==(const ProbEdge&, const ProbEdge&) = default;
};

/// One traversable direction of an edge.
struct Arc {
  NodeId to;
  EdgeId edge;
};

/**
 * Uncertain graph (V, E, p). Immutable once built; share freely across threads.
 *
 * Undirected graphs keep one logical edge per pair. Its existence is a single
 * coin, and the edge appears in the adjacency of both endpoints.
 */
class UncertainGraph {
 public:
  UncertainGraph() = default;

  UncertainGraph(NodeTable names, bool directed, std::vector<ProbEdge> edges)
      : names_(std::move(names)), directed_(directed), edges_(std::move(edges)) {
    const std::size_t n = names_.size();
    index_.reserve(edges_.size());
    for (EdgeId e = 0; e < edges_.size(); ++e) {
      const auto& pe = edges_[e];
      if (pe.src >= n || pe.dst >= n) throw InputError("edge endpoint out of range");
      if (pe.src == pe.dst) throw InputError("self loop on node '" + names_.label(pe.src) + "'");
      if (!(pe.prob >= 0.0 && pe.prob <= 1.0)) throw InputError("edge probability outside [0,1]");
      if (!index_.emplace(key(pe.src, pe.dst), e).second) {
        throw InputError("duplicate edge " + names_.label(pe.src) + " " + names_.label(pe.dst));
      }
    }
    build_csr(out_offsets_, out_arcs_, /*forward=*/true);
    if (!directed_) {
      in_offsets_ = out_offsets_;
      in_arcs_ = out_arcs_;
    } else {
      build_csr(in_offsets_, in_arcs_, /*forward=*/false);
    }
  }

  std::size_t node_count() const noexcept { return names_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool directed() const noexcept { return directed_; }

  const ProbEdge& edge(EdgeId e) const { return edges_[e]; }
  const std::vector<ProbEdge>& edges() const noexcept { return edges_; }
  const NodeTable& names() const noexcept { return names_; }

  std::span<const Arc> out(NodeId v) const {
    return {out_arcs_.data() + out_offsets_[v], out_arcs_.data() + out_offsets_[v + 1]};
  }
  std::span<const Arc> in(NodeId v) const {
    return {in_arcs_.data() + in_offsets_[v], in_arcs_.data() + in_offsets_[v + 1]};
  }
  // Forward adjacency when `forward`, otherwise the reversed graph's.
  std::span<const Arc> arcs(NodeId v, bool forward) const { return forward ? out(v) : in(v); }

  std::optional<EdgeId> find_edge(NodeId u, NodeId v) const {
    auto it = index_.find(key(u, v));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool has_edge(NodeId u, NodeId v) const { return index_.count(key(u, v)) != 0; }

 private:
  std::uint64_t key(NodeId u, NodeId v) const noexcept {
    if (!directed_ && v < u) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | v;
  }

  void build_csr(std::vector<std::size_t>& offsets, std::vector<Arc>& arcs, bool forward) const {
    const std::size_t n = names_.size();
    offsets.assign(n + 1, 0);
    for (const auto& pe : edges_) {
      ++offsets[(forward ? pe.src : pe.dst) + 1];
      if (!directed_) ++offsets[(forward ? pe.dst : pe.src) + 1];
    }
    for (std::size_t v = 0; v < n; ++v) offsets[v + 1] += offsets[v];
    arcs.resize(offsets[n]);
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (EdgeId e = 0; e < edges_.size(); ++e) {
      const auto& pe = edges_[e];
      const NodeId a = forward ? pe.src : pe.dst;
      const NodeId b = forward ? pe.dst : pe.src;
      arcs[fill[a]++] = Arc{b, e};
      if (!directed_) arcs[fill[b]++] = Arc{a, e};
    }
  }

  NodeTable names_;
  bool directed_ = true;
  std::vector<ProbEdge> edges_;
  std::unordered_map<std::uint64_t, EdgeId> index_;
  std::vector<std::size_t> out_offsets_{0}, in_offsets_{0};
  std::vector<Arc> out_arcs_, in_arcs_;
};

/// Copy of `g` with `extra` appended; new edges get ids m, m+1, ...
inline UncertainGraph with_edges(const UncertainGraph& g, std::span<const ProbEdge> extra) {
  std::vector<ProbEdge> edges = g.edges();
  edges.insert(edges.end(), extra.begin(), extra.end());
  return UncertainGraph(g.names(), g.directed(), std::move(edges));
}

// ---------------------------------------------------------------------------
// Edge-list text format
//
//   [directed|undirected]      optional first statement, default directed
//   src dst prob               one edge per line
//   label                      declares a node that may have no edges
//   # ...                      comment to end of line
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

struct LoadOptions {
  // Overrides the file's directive when set.
  std::optional<bool> directed;
  // Collects non-fatal notes (dropped zero-probability edges).
  std::vector<std::string>* warnings = nullptr;
};

inline UncertainGraph parse_graph(std::istream& in, const LoadOptions& opts = {}) {
  NodeTable names;
  std::optional<bool> directive;
  struct Raw {
    NodeId src, dst;
    double prob;
    std::size_t line;
  };
  std::vector<Raw> raw;
  std::string line;
  std::size_t lineno = 0;
  bool seen_statement = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tok = detail::split_ws(view);
    if (tok.empty()) continue;
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (!seen_statement && tok.size() == 1 && (tok[0] == "directed" || tok[0] == "undirected")) {
      directive = tok[0] == "directed";
      seen_statement = true;
      continue;
    }
    seen_statement = true;
    if (tok.size() == 1) {
      names.intern(tok[0]);
      continue;
    }
    if (tok.size() != 3) throw InputError(where + "expected 'src dst prob'");
    const auto p = detail::parse_double(tok[2]);
    if (!p) throw InputError(where + "bad probability '" + std::string(tok[2]) + "'");
    if (!(*p >= 0.0 && *p <= 1.0)) throw InputError(where + "probability outside [0,1]");
    if (tok[0] == tok[1]) throw InputError(where + "self loop on '" + std::string(tok[0]) + "'");
    const NodeId a = names.intern(tok[0]);
    const NodeId b = names.intern(tok[1]);
    raw.push_back({a, b, *p, lineno});
  }

  const bool directed = opts.directed.value_or(directive.value_or(true));
  std::unordered_map<std::uint64_t, std::size_t> seen;
  std::vector<ProbEdge> edges;
  edges.reserve(raw.size());
  for (const auto& r : raw) {
    NodeId u = r.src, v = r.dst;
    if (!directed && v < u) std::swap(u, v);
    const auto k = (static_cast<std::uint64_t>(u) << 32) | v;
    if (auto [it, fresh] = seen.emplace(k, r.line); !fresh) {
      throw InputError("line " + std::to_string(r.line) + ": duplicate edge (first seen on line " +
                       std::to_string(it->second) + ")");
    }
    if (r.prob == 0.0) {
      if (opts.warnings) {
        opts.warnings->push_back("line " + std::to_string(r.line) + ": dropped zero-probability edge");
      }
      continue;
    }
    edges.push_back({r.src, r.dst, r.prob});
  }
  return UncertainGraph(std::move(names), directed, std::move(edges));
}

inline UncertainGraph load_graph(const std::string& path, const LoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file '" + path + "'");
  try {
    return parse_graph(in, opts);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

/// Writes the edge-list format. Every node is declared up front, so loading
/// the output reproduces the same ids and keeps isolated nodes.
inline void write_graph(std::ostream& out, const UncertainGraph& g) {
  out << (g.directed() ? "directed\n" : "undirected\n");
  for (NodeId v = 0; v < g.node_count(); ++v) out << g.names().label(v) << '\n';
  for (const auto& e : g.edges()) {
    out << g.names().label(e.src) << ' ' << g.names().label(e.dst) << ' '
        << detail::format_double(e.prob) << '\n';
  }
}

inline std::string to_edge_list(const UncertainGraph& g) {
  std::ostringstream os;
  write_graph(os, g);
  return os.str();
}

// ---------------------------------------------------------------------------
// Possible worlds
// ---------------------------------------------------------------------------

/// Presence bit per edge of the graph it was drawn from.
using PossibleWorld = std::vector<bool>;

/// Key of world `index` under `seed`; all per-world coins derive from it.
inline std::uint64_t world_key(std::uint64_t seed, std::uint64_t index) noexcept {
  return rng::derive(seed, index);
}

inline PossibleWorld sample_world(const UncertainGraph& g, std::uint64_t seed, std::uint64_t index) {
  const auto key = world_key(seed, index);
  PossibleWorld w(g.edge_count());
  for (EdgeId e = 0; e < g.edge_count(); ++e) w[e] = rng::edge_present(key, e, g.edge(e).prob);
  return w;
}

inline double world_probability(const UncertainGraph& g, const PossibleWorld& w) {
  if (w.size() != g.edge_count()) throw InputError("world mask length does not match edge count");
  double pr = 1.0;
  for (EdgeId e = 0; e < g.edge_count(); ++e) pr *= w[e] ? g.edge(e).prob : 1.0 - g.edge(e).prob;
  return pr;
}

/// Breadth-first search over edges accepted by `present`. Calls `visit(v)` for
/// every reached node (source included); stops early when `visit` returns true.
template <class Present, class Visit>
bool bfs(const UncertainGraph& g, NodeId source, bool forward, Present&& present, Visit&& visit,
         std::vector<char>& mark, std::vector<NodeId>& queue) {
  queue.clear();
  queue.push_back(source);
  mark[source] = 1;
  bool stopped = visit(source);
  for (std::size_t head = 0; head < queue.size() && !stopped; ++head) {
    const NodeId u = queue[head];
    for (const Arc& a : g.arcs(u, forward)) {
      if (mark[a.to] || !present(a.edge)) continue;
      mark[a.to] = 1;
      queue.push_back(a.to);
      if (visit(a.to)) {
        stopped = true;
        break;
      }
    }
  }
  for (NodeId v : queue) mark[v] = 0;
  return stopped;
}

inline bool reachable(const PossibleWorld& w, const UncertainGraph& g, NodeId s, NodeId t) {
  if (s == t) return true;
  std::vector<char> mark(g.node_count(), 0);
  std::vector<NodeId> queue;
  return bfs(
      g, s, true, [&](EdgeId e) { return static_cast<bool>(w[e]); }, [&](NodeId v) { return v == t; }, mark,
      queue);
}

/// Undirected hop distances from `source` up to `max_hops`; unreached nodes
/// are left out. Returned as (node, hops) pairs in BFS order.
inline std::vector<std::pair<NodeId, int>> hop_ball(const UncertainGraph& g, NodeId source, int max_hops,
                                                    bool ignore_direction = true) {
  std::vector<std::pair<NodeId, int>> ball{{source, 0}};
  std::unordered_map<NodeId, int> dist{{source, 0}};
  for (std::size_t head = 0; head < ball.size(); ++head) {
    auto [u, d] = ball[head];
    if (d == max_hops) continue;
    auto expand = [&](std::span<const Arc> arcs) {
      for (const Arc& a : arcs) {
        if (dist.emplace(a.to, d + 1).second) ball.emplace_back(a.to, d + 1);
      }
    };
    expand(g.out(u));
    if (ignore_direction && g.directed()) expand(g.in(u));
  }
  return ball;
}

}  // namespace relmax
