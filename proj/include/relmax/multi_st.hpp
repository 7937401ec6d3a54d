#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "relmax/candidates.hpp"
#include "relmax/common.hpp"
#include "relmax/estimators.hpp"
#include "relmax/graph.hpp"
#include "relmax/selection.hpp"

namespace relmax {

struct MultiQuery {
  std::vector<NodeId> sources;
  std::vector<NodeId> targets;
  Aggregate aggregate = Aggregate::avg;
  std::size_t k = 10;
  double k1_ratio = 0.10;

  std::vector<QueryPair> pairs() const {
    std::vector<QueryPair> out;
    for (NodeId s : sources) {
      for (NodeId t : targets) out.emplace_back(s, t);
    }
    return out;
  }
  std::size_t k1() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(k1_ratio * static_cast<double>(k))));
  }
};

namespace detail {

inline std::vector<NodeId> parse_node_list(std::string_view text, const NodeTable& names, const std::string& where) {
  std::vector<NodeId> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    auto tok = text.substr(start, comma - start);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
    if (tok.empty()) throw InputError(where + "empty node label in list");
    auto id = names.find(tok);
    if (!id) throw InputError(where + "unknown node label '" + std::string(tok) + "'");
    if (std::find(out.begin(), out.end(), *id) == out.end()) out.push_back(*id);
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Parses `S: a,b,c | T: x,y,z`.
inline MultiQuery parse_multi_query(std::string_view line, const NodeTable& names, const std::string& where = "") {
  const auto bar = line.find('|');
  if (bar == std::string_view::npos) throw InputError(where + "expected 'S: ... | T: ...'");
  auto side = [&](std::string_view part, char tag) {
    while (!part.empty() && std::isspace(static_cast<unsigned char>(part.front()))) part.remove_prefix(1);
    if (part.size() < 2 || part[0] != tag || part[1] != ':') {
      throw InputError(where + "expected '" + std::string(1, tag) + ":' section");
    }
    return detail::parse_node_list(part.substr(2), names, where);
  };
  MultiQuery q;
  q.sources = side(line.substr(0, bar), 'S');
  q.targets = side(line.substr(bar + 1), 'T');
  return q;
}

inline std::vector<MultiQuery> load_multi_queries(const std::string& path, const NodeTable& names) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open query file '" + path + "'");
  std::vector<MultiQuery> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    if (view.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    out.push_back(parse_multi_query(view, names, path + ": line " + std::to_string(lineno) + ": "));
  }
  return out;
}

struct MultiParams {
  PipelineParams pipeline;
  EstimatorConfig estimator;
};

inline void validate(const MultiQuery& q, const UncertainGraph& g) {
  if (q.sources.empty() || q.targets.empty()) throw InputError("source and target sets must be non-empty");
  for (NodeId v : q.sources) {
    if (v >= g.node_count()) throw InputError("source node out of range");
  }
  for (NodeId v : q.targets) {
    if (v >= g.node_count()) throw InputError("target node out of range");
  }
  if (q.k < 1) throw InputError("k must be at least 1");
  if (!(q.k1_ratio > 0.0 && q.k1_ratio <= 1.0)) throw InputError("k1 ratio must lie in (0, 1]");
}

/// Average aggregate: one batch selection over the pooled paths of every
/// pair, maximizing the sum of pair reliabilities.
inline SelectionResult select_multi_avg(const UncertainGraph& g, const MultiQuery& q, const MultiParams& params) {
  validate(q, g);
  const auto pairs = q.pairs();
  const auto prep = prepare_query(g, q.sources, q.targets, pairs, params.pipeline, params.estimator);
  return select_be_pairs(g, prep.candidates, prep.paths, pairs, q.k, params.estimator, Aggregate::avg);
}

namespace detail {

// Min/max aggregates: repeatedly spend an installment of k1 edges on the pair
// with the smallest (largest) current reliability.
inline SelectionResult select_multi_extreme(const UncertainGraph& g, const MultiQuery& q, const MultiParams& params,
                                            bool want_min) {
  validate(q, g);
  const auto pairs = q.pairs();
  const auto& cfg = params.estimator;
  const Aggregate agg = want_min ? Aggregate::min : Aggregate::max;
  if (pairs.size() == 1) {
    // A single pair is plain batch selection with the whole budget.
    const auto prep = prepare_query(g, q.sources, q.targets, pairs, params.pipeline, cfg);
    return select_be_pairs(g, prep.candidates, prep.paths, pairs, q.k, cfg, agg);
  }

  SelectionResult res;
  UncertainGraph current = g;
  std::vector<CandidateEdge> inserted;
  std::vector<char> demoted(pairs.size(), 0);
  std::size_t remaining = q.k;
  auto values = [&] {
    std::vector<double> v;
    for (const auto& e : pair_estimates(current, pairs, cfg)) v.push_back(e.value);
    return v;
  };
  auto rel = values();
  while (remaining > 0) {
    std::size_t focal = pairs.size();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (demoted[i]) continue;
      if (focal == pairs.size() || (want_min ? rel[i] < rel[focal] : rel[i] > rel[focal])) focal = i;
    }
    if (focal == pairs.size()) break;
    const auto [s, t] = pairs[focal];
    const std::size_t budget = std::min(q.k1(), remaining);
    const auto prep = prepare_query(current, s, t, params.pipeline, cfg);
    auto sub = select_be(current, prep.candidates, prep.paths, s, t, budget, cfg);
    TraceRound round;
    round.round = res.trace.size() + 1;
    round.note = "installment pair=" + std::to_string(focal);
    if (sub.chosen.empty() || sub.gain <= 1e-12) {
      demoted[focal] = 1;
      round.note += " demoted";
      res.trace.push_back(std::move(round));
      continue;
    }
    for (auto& c : sub.chosen) {
      c.id = static_cast<CandidateId>(inserted.size());
      inserted.push_back(c);
      round.added.push_back(c.id);
    }
    round.label = round.added;
    round.gain = sub.gain;
    current = with_candidates(current, sub.chosen);
    remaining -= sub.chosen.size();
    std::fill(demoted.begin(), demoted.end(), 0);
    rel = values();
    round.objective = aggregate(rel, agg);
    res.trace.push_back(std::move(round));
  }
  res.chosen = std::move(inserted);
  finalize(res, g, pairs, agg, cfg);
  return res;
}

}  // namespace detail

inline SelectionResult select_multi_min(const UncertainGraph& g, const MultiQuery& q, const MultiParams& params) {
  return detail::select_multi_extreme(g, q, params, true);
}

inline SelectionResult select_multi_max(const UncertainGraph& g, const MultiQuery& q, const MultiParams& params) {
  for (NodeId s : q.sources) {
    if (std::find(q.targets.begin(), q.targets.end(), s) != q.targets.end()) {
      throw InputError("max aggregate needs disjoint source and target sets: the maximum reliability is already one");
    }
  }
  return detail::select_multi_extreme(g, q, params, false);
}

inline SelectionResult select_multi(const UncertainGraph& g, const MultiQuery& q, const MultiParams& params) {
  switch (q.aggregate) {
    case Aggregate::avg: return select_multi_avg(g, q, params);
    case Aggregate::min: return select_multi_min(g, q, params);
    case Aggregate::max: return select_multi_max(g, q, params);
  }
  return {};
}

/// Expected number of targets reached from at least one source, by Monte
/// Carlo over Z worlds.
inline double influence_spread(const UncertainGraph& g, std::span<const NodeId> sources,
                               std::span<const NodeId> targets, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw InputError("sample count must be positive");
  std::vector<char> mark(g.node_count(), 0);
  std::vector<NodeId> queue;
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto key = world_key(seed, i);
    queue.clear();
    for (NodeId s : sources) {
      if (!mark[s]) {
        mark[s] = 1;
        queue.push_back(s);
      }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (const Arc& a : g.out(queue[head])) {
        if (mark[a.to] || !rng::edge_present(key, a.edge, g.edge(a.edge).prob)) continue;
        mark[a.to] = 1;
        queue.push_back(a.to);
      }
    }
    for (NodeId t : targets) hits += mark[t] ? 1 : 0;
    for (NodeId v : queue) mark[v] = 0;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace relmax
