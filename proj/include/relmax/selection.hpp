#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relmax/candidates.hpp"
#include "relmax/common.hpp"
#include "relmax/estimators.hpp"
#include "relmax/graph.hpp"
#include "relmax/paths.hpp"

namespace relmax {

using QueryPair = std::pair<NodeId, NodeId>;

enum class Aggregate { avg, min, max };

inline const char* to_string(Aggregate a) {
  switch (a) {
    case Aggregate::avg: return "avg";
    case Aggregate::min: return "min";
    case Aggregate::max: return "max";
  }
  return "?";
}

inline Aggregate parse_aggregate(const std::string& s) {
  if (s == "avg") return Aggregate::avg;
  if (s == "min") return Aggregate::min;
  if (s == "max") return Aggregate::max;
  throw InputError("unknown aggregate '" + s + "' (expected avg, min or max)");
}

/// One scored option inside a greedy round.
struct Evaluation {
  std::vector<CandidateId> label;
  double gain = 0.0;
  double score = 0.0;
};

struct TraceRound {
  std::size_t round = 0;
  std::vector<CandidateId> label;  // path label, batch label or single candidate
  std::vector<CandidateId> added;  // candidates newly inserted this round
  double gain = 0.0;               // marginal gain of the pick
  double objective = 0.0;          // objective after the round
  double variance = 0.0;
  std::string note;                // "fallback", "fill", "installment pair=i", ...
  std::vector<Evaluation> evaluations;
};

struct SelectionResult {
  std::vector<CandidateEdge> chosen;
  double base_reliability = 0.0;
  double new_reliability = 0.0;
  double gain = 0.0;
  std::size_t samples = 0;
  std::vector<TraceRound> trace;
  bool filled = false;
  std::vector<double> pair_base;  // per query pair, multi-pair runs
  std::vector<double> pair_new;
};

/// Paths sharing one label L = candidate edges they use.
struct PathBatch {
  std::vector<CandidateId> label;
  std::vector<ReliablePath> paths;
};

/// Groups paths by label; the candidate-free batch comes first, the rest in
/// order of first appearance.
inline std::vector<PathBatch> build_batches(std::span<const ReliablePath> paths, const CandidateSet& cands) {
  (void)cands;
  std::vector<PathBatch> out;
  std::map<std::vector<CandidateId>, std::size_t> index;
  if (std::any_of(paths.begin(), paths.end(), [](const ReliablePath& p) { return p.candidates.empty(); })) {
    out.push_back(PathBatch{});
    index[{}] = 0;
  }
  for (const auto& p : paths) {
    auto [it, fresh] = index.try_emplace(p.candidates, out.size());
    if (fresh) out.push_back(PathBatch{p.candidates, {}});
    out[it->second].paths.push_back(p);
  }
  return out;
}

/// Per-pair reliabilities. Pair i is estimated with seed derive(seed, i).
inline std::vector<ReliabilityEstimate> pair_estimates(const UncertainGraph& g, std::span<const QueryPair> pairs,
                                                       const EstimatorConfig& cfg) {
  std::vector<ReliabilityEstimate> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EstimatorConfig c = cfg;
    c.seed = rng::derive(cfg.seed, i);
    out.push_back(estimate(g, pairs[i].first, pairs[i].second, c));
  }
  return out;
}

inline double aggregate(std::span<const double> values, Aggregate agg) {
  if (values.empty()) return 0.0;
  switch (agg) {
    case Aggregate::avg: return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    case Aggregate::min: return *std::min_element(values.begin(), values.end());
    case Aggregate::max: return *std::max_element(values.begin(), values.end());
  }
  return 0.0;
}

namespace detail {

inline bool label_subset(const std::vector<CandidateId>& label, const std::vector<CandidateId>& set) {
  return std::includes(set.begin(), set.end(), label.begin(), label.end());
}

inline std::vector<CandidateId> label_union(const std::vector<CandidateId>& a, const std::vector<CandidateId>& b) {
  std::vector<CandidateId> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline std::vector<CandidateEdge> to_edges(const CandidateSet& cands, const std::vector<CandidateId>& ids) {
  std::vector<CandidateEdge> out;
  for (CandidateId id : ids) out.push_back(cands.at(id));
  return out;
}

// Fills in base/new reliability from full-graph estimates.
inline void finalize(SelectionResult& res, const UncertainGraph& g, std::span<const QueryPair> pairs, Aggregate agg,
                     const EstimatorConfig& cfg) {
  const auto before = pair_estimates(g, pairs, cfg);
  const auto after = pair_estimates(with_candidates(g, res.chosen), pairs, cfg);
  res.pair_base.clear();
  res.pair_new.clear();
  for (const auto& e : before) {
    res.pair_base.push_back(e.value);
    res.samples = std::max(res.samples, e.samples_used);
  }
  for (const auto& e : after) {
    res.pair_new.push_back(e.value);
    res.samples = std::max(res.samples, e.samples_used);
  }
  res.base_reliability = aggregate(res.pair_base, agg);
  res.new_reliability = aggregate(res.pair_new, agg);
  res.gain = res.new_reliability - res.base_reliability;
}

// Sum of pair reliabilities on the full graph plus `extra`.
inline double full_objective(const UncertainGraph& g, std::span<const CandidateEdge> extra,
                             std::span<const QueryPair> pairs, const EstimatorConfig& cfg, double* variance = nullptr) {
  const auto est = pair_estimates(extra.empty() ? g : with_candidates(g, extra), pairs, cfg);
  double sum = 0.0, var = 0.0;
  for (const auto& e : est) {
    sum += e.value;
    var += e.variance;
  }
  if (variance) *variance = var;
  return sum;
}

// Objective on subgraphs induced by sets of paths: sum over query pairs of
// the pair reliability, using exact evaluation when it fits the cap.
class PathObjective {
 public:
  PathObjective(const UncertainGraph& g, const CandidateSet& cands, std::vector<QueryPair> pairs,
                const EstimatorConfig& cfg)
      : aug_(augment(g, cands)), pairs_(std::move(pairs)), cfg_(cfg) {}

  std::vector<EdgeId> edges_of(const ReliablePath& p) const {
    std::vector<EdgeId> out;
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
      auto e = aug_.graph.find_edge(p.nodes[i], p.nodes[i + 1]);
      if (!e) throw InputError("path uses an edge that is neither present nor a candidate");
      out.push_back(*e);
    }
    return out;
  }

  // `edges` sorted and unique.
  double evaluate(const std::vector<EdgeId>& edges) {
    if (auto it = cache_.find(edges); it != cache_.end()) {
      last_variance_ = it->second.second;
      return it->second.first;
    }
    std::vector<NodeId> nodes;
    for (EdgeId e : edges) {
      nodes.push_back(aug_.graph.edge(e).src);
      nodes.push_back(aug_.graph.edge(e).dst);
    }
    for (auto [s, t] : pairs_) {
      nodes.push_back(s);
      nodes.push_back(t);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    auto local = [&](NodeId v) {
      return static_cast<NodeId>(std::lower_bound(nodes.begin(), nodes.end(), v) - nodes.begin());
    };
    std::vector<ProbEdge> sub;
    sub.reserve(edges.size());
    for (EdgeId e : edges) {
      const auto& pe = aug_.graph.edge(e);
      sub.push_back({local(pe.src), local(pe.dst), pe.prob});
    }
    const UncertainGraph h(NodeTable::numbered(nodes.size()), aug_.graph.directed(), std::move(sub));
    std::vector<QueryPair> lp;
    for (auto [s, t] : pairs_) lp.emplace_back(local(s), local(t));
    double sum = 0.0, var = 0.0;
    for (const auto& e : pair_estimates(h, lp, cfg_)) {
      sum += e.value;
      var += e.variance;
    }
    cache_.emplace(edges, std::make_pair(sum, var));
    last_variance_ = var;
    return sum;
  }

  double last_variance() const noexcept { return last_variance_; }

 private:
  AugmentedGraph aug_;
  std::vector<QueryPair> pairs_;
  EstimatorConfig cfg_;
  std::map<std::vector<EdgeId>, std::pair<double, double>> cache_;
  double last_variance_ = 0.0;
};

inline std::vector<EdgeId> merge_edges(std::vector<EdgeId> a, const std::vector<EdgeId>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

// Tops up E1 with the best remaining candidates by individual full-graph gain.
inline void fill_budget(SelectionResult& res, std::vector<CandidateId>& chosen, const UncertainGraph& g,
                        const CandidateSet& cands, std::span<const QueryPair> pairs, std::size_t k,
                        const EstimatorConfig& cfg) {
  if (chosen.size() >= k) return;
  std::vector<CandidateId> rest;
  for (const auto& c : cands.edges) {
    if (!std::binary_search(chosen.begin(), chosen.end(), c.id)) rest.push_back(c.id);
  }
  if (rest.empty()) return;
  const auto current = to_edges(cands, chosen);
  const double base = full_objective(g, current, pairs, cfg);
  std::vector<Evaluation> evals;
  for (CandidateId id : rest) {
    auto extra = current;
    extra.push_back(cands.at(id));
    const double gain = full_objective(g, extra, pairs, cfg) - base;
    evals.push_back({{id}, gain, gain});
  }
  std::stable_sort(evals.begin(), evals.end(), [](const Evaluation& a, const Evaluation& b) {
    return !nearly_equal(a.gain, b.gain) && a.gain > b.gain;
  });
  const std::size_t take = std::min(k - chosen.size(), evals.size());
  TraceRound round;
  round.round = res.trace.size() + 1;
  round.note = "fill";
  for (std::size_t i = 0; i < take; ++i) {
    round.added.push_back(evals[i].label.front());
    round.gain += evals[i].gain;
  }
  std::sort(round.added.begin(), round.added.end());
  round.label = round.added;
  chosen = label_union(chosen, round.added);
  round.objective = full_objective(g, to_edges(cands, chosen), pairs, cfg, &round.variance);
  round.evaluations = std::move(evals);
  res.trace.push_back(std::move(round));
  res.filled = true;
}

// Path-batch greedy (BE) over an arbitrary list of query pairs; the
// objective is the sum of pair reliabilities on path-induced subgraphs.
inline std::vector<CandidateId> batch_select(SelectionResult& res, const UncertainGraph& g,
                                             const CandidateSet& cands, std::span<const ReliablePath> paths,
                                             std::span<const QueryPair> pairs, std::size_t k,
                                             const EstimatorConfig& cfg) {
  std::vector<CandidateId> chosen;
  if (paths.empty()) return chosen;
  PathObjective obj(g, cands, {pairs.begin(), pairs.end()}, cfg);
  const auto batches = build_batches(paths, cands);
  std::vector<std::vector<EdgeId>> batch_edges;
  for (const auto& b : batches) {
    std::vector<EdgeId> edges;
    for (const auto& p : b.paths) edges = merge_edges(std::move(edges), obj.edges_of(p));
    batch_edges.push_back(std::move(edges));
  }
  auto edges_within = [&](const std::vector<CandidateId>& allowed) {
    std::vector<EdgeId> edges;
    for (std::size_t i = 0; i < batches.size(); ++i) {
      if (label_subset(batches[i].label, allowed)) edges = merge_edges(std::move(edges), batch_edges[i]);
    }
    return edges;
  };
  double current = obj.evaluate(edges_within(chosen));

  while (chosen.size() < k) {
    struct Option {
      std::size_t batch;
      std::vector<CandidateId> next;
      double value, gain, score;
      std::size_t fresh;
    };
    std::vector<Option> options;
    TraceRound round;
    for (std::size_t i = 0; i < batches.size(); ++i) {
      const auto& label = batches[i].label;
      if (label_subset(label, chosen)) continue;
      auto next = label_union(chosen, label);
      if (next.size() > k) continue;
      const double value = obj.evaluate(edges_within(next));
      const std::size_t fresh = next.size() - chosen.size();
      const double gain = value - current;
      options.push_back({i, std::move(next), value, gain, gain / static_cast<double>(fresh), fresh});
      round.evaluations.push_back({label, gain, options.back().score});
    }
    if (options.empty()) break;
    auto better = [&](const Option& a, const Option& b) {
      if (!nearly_equal(a.score, b.score)) return a.score > b.score;
      if (!nearly_equal(a.gain, b.gain)) return a.gain > b.gain;
      if (batches[a.batch].label.size() != batches[b.batch].label.size()) {
        return batches[a.batch].label.size() < batches[b.batch].label.size();
      }
      return batches[a.batch].label < batches[b.batch].label;
    };
    const Option* best = &options.front();
    for (const auto& o : options) {
      if (better(o, *best)) best = &o;
    }
    if (best->gain <= 1e-12) {
      // No batch helps yet: take the feasible batch holding the most probable path.
      const Option* fb = &options.front();
      for (const auto& o : options) {
        if (batches[o.batch].paths.front().weight < batches[fb->batch].paths.front().weight &&
            !nearly_equal(batches[o.batch].paths.front().weight, batches[fb->batch].paths.front().weight)) {
          fb = &o;
        }
      }
      best = fb;
      round.note = "fallback";
    }
    std::set_difference(best->next.begin(), best->next.end(), chosen.begin(), chosen.end(),
                        std::back_inserter(round.added));
    round.round = res.trace.size() + 1;
    round.label = batches[best->batch].label;
    round.gain = best->gain;
    round.objective = best->value;
    chosen = best->next;
    current = best->value;
    obj.evaluate(edges_within(chosen));
    round.variance = obj.last_variance();
    res.trace.push_back(std::move(round));
  }
  return chosen;
}

}  // namespace detail

/// Batch selection for several pairs at once; objective is the pair sum.
/// Base/new reliabilities are aggregated with `agg`.
inline SelectionResult select_be_pairs(const UncertainGraph& g, const CandidateSet& cands,
                                       std::span<const ReliablePath> paths, std::span<const QueryPair> pairs,
                                       std::size_t k, const EstimatorConfig& cfg, Aggregate agg = Aggregate::avg) {
  if (k < 1) throw InputError("k must be at least 1");
  SelectionResult res;
  auto chosen = detail::batch_select(res, g, cands, paths, pairs, k, cfg);
  if (!paths.empty()) detail::fill_budget(res, chosen, g, cands, pairs, k, cfg);
  res.chosen = detail::to_edges(cands, chosen);
  detail::finalize(res, g, pairs, agg, cfg);
  return res;
}

/// Path-batch selection (BE).
inline SelectionResult select_be(const UncertainGraph& g, const CandidateSet& cands,
                                 std::span<const ReliablePath> paths, NodeId s, NodeId t, std::size_t k,
                                 const EstimatorConfig& cfg) {
  const QueryPair pair[] = {{s, t}};
  return select_be_pairs(g, cands, paths, pair, k, cfg);
}

/// Individual-path selection (IP).
inline SelectionResult select_ip(const UncertainGraph& g, const CandidateSet& cands,
                                 std::span<const ReliablePath> paths, NodeId s, NodeId t, std::size_t k,
                                 const EstimatorConfig& cfg) {
  if (k < 1) throw InputError("k must be at least 1");
  const QueryPair pair[] = {{s, t}};
  SelectionResult res;
  std::vector<CandidateId> chosen;
  if (!paths.empty()) {
    detail::PathObjective obj(g, cands, {{s, t}}, cfg);
    std::vector<EdgeId> included;
    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      if (paths[i].candidates.empty()) {
        included = detail::merge_edges(std::move(included), obj.edges_of(paths[i]));
      } else if (paths[i].candidates.size() <= k) {
        remaining.push_back(i);
      }
    }
    double current = obj.evaluate(included);
    while (chosen.size() < k && !remaining.empty()) {
      TraceRound round;
      std::size_t best = 0;
      double best_value = -1.0;
      std::vector<EdgeId> best_edges;
      for (std::size_t j = 0; j < remaining.size(); ++j) {
        auto edges = detail::merge_edges(included, obj.edges_of(paths[remaining[j]]));
        const double value = obj.evaluate(edges);
        round.evaluations.push_back({paths[remaining[j]].candidates, value - current, value - current});
        if (value > best_value && !(j > 0 && detail::nearly_equal(value, best_value))) {
          best = j;
          best_value = value;
          best_edges = std::move(edges);
        }
      }
      const auto& pick = paths[remaining[best]];
      auto next = detail::label_union(chosen, pick.candidates);
      std::set_difference(next.begin(), next.end(), chosen.begin(), chosen.end(), std::back_inserter(round.added));
      round.round = res.trace.size() + 1;
      round.label = pick.candidates;
      round.gain = best_value - current;
      round.objective = best_value;
      obj.evaluate(best_edges);
      round.variance = obj.last_variance();
      res.trace.push_back(std::move(round));
      chosen = std::move(next);
      included = std::move(best_edges);
      current = best_value;
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
      std::erase_if(remaining,
                    [&](std::size_t i) { return detail::label_union(chosen, paths[i].candidates).size() > k; });
    }
    detail::fill_budget(res, chosen, g, cands, pair, k, cfg);
  }
  res.chosen = detail::to_edges(cands, chosen);
  detail::finalize(res, g, pair, Aggregate::avg, cfg);
  return res;
}

inline constexpr std::size_t kExactSubsetCap = 200000;

/// Exhaustive optimum over all candidate subsets of size min(k, |cands|).
inline SelectionResult select_exact(const UncertainGraph& g, const CandidateSet& cands, NodeId s, NodeId t,
                                    std::size_t k, const EstimatorConfig& cfg,
                                    std::size_t subset_cap = kExactSubsetCap) {
  if (k < 1) throw InputError("k must be at least 1");
  const std::size_t q = cands.size();
  const std::size_t size = std::min(k, q);
  double combos = 1.0;
  for (std::size_t i = 0; i < size; ++i) combos = combos * static_cast<double>(q - i) / static_cast<double>(i + 1);
  if (combos > static_cast<double>(subset_cap) + 0.5) {
    throw InfeasibleError("exact selection needs " + std::to_string(static_cast<long long>(combos)) +
                          " subsets, cap is " + std::to_string(subset_cap));
  }
  const QueryPair pair[] = {{s, t}};
  SelectionResult res;
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<CandidateEdge> best;
  double best_value = -1.0;
  TraceRound round;
  round.round = 1;
  for (;;) {
    std::vector<CandidateEdge> subset;
    for (std::size_t i : idx) subset.push_back(cands.edges[i]);
    const double value = detail::full_objective(g, subset, pair, cfg);
    std::vector<CandidateId> label;
    for (const auto& c : subset) label.push_back(c.id);
    round.evaluations.push_back({label, value, value});
    if (value > best_value + 1e-12) {
      best_value = value;
      best = subset;
    }
    // Next combination in lexicographic order.
    std::size_t i = size;
    while (i > 0 && idx[i - 1] == q - size + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
  for (const auto& c : best) round.label.push_back(c.id);
  round.added = round.label;
  round.objective = best_value;
  res.trace.push_back(std::move(round));
  res.chosen = std::move(best);
  detail::finalize(res, g, pair, Aggregate::avg, cfg);
  if (!res.trace.empty()) res.trace.back().gain = res.gain;
  return res;
}

/// Elimination, top-l path extraction and pruning for a set of pairs.
struct PipelineParams {
  std::size_t r = 100;
  int h = 3;
  double zeta = 0.5;
  std::size_t l = 30;
  bool directed_hops = false;
  const ProbOverrides* overrides = nullptr;
  std::vector<std::string>* warnings = nullptr;
};

struct PreparedQuery {
  CandidateSet candidates;  // after pruning by paths
  std::size_t eliminated_size = 0;
  std::vector<ReliablePath> paths;
};

/// Candidate generation and path extraction shared by IP, BE and the
/// multi-pair methods. Paths of all pairs are pooled, deduplicated by node
/// sequence and ordered by probability.
inline PreparedQuery prepare_query(const UncertainGraph& g, std::span<const NodeId> sources,
                                   std::span<const NodeId> targets, std::span<const QueryPair> pairs,
                                   const PipelineParams& params, const EstimatorConfig& cfg) {
  EliminationParams ep;
  ep.r = params.r;
  ep.h = params.h;
  ep.zeta = params.zeta;
  ep.directed_hops = params.directed_hops;
  ep.overrides = params.overrides;
  ep.warnings = params.warnings;
  ep.estimator = cfg;
  if (ep.estimator.method != Method::mc) ep.estimator.method = Method::rss;
  PreparedQuery out;
  const auto cands = eliminate_multi(g, sources, targets, ep);
  out.eliminated_size = cands.size();
  const auto aug = augment(g, cands);
  std::set<std::vector<NodeId>> seen;
  for (auto [s, t] : pairs) {
    for (auto& p : top_l_paths(aug.graph, s, t, params.l, aug.map)) {
      if (seen.insert(p.nodes).second) out.paths.push_back(std::move(p));
    }
  }
  std::stable_sort(out.paths.begin(), out.paths.end(), detail::path_before);
  out.candidates = prune_by_paths(cands, out.paths);
  return out;
}

inline PreparedQuery prepare_query(const UncertainGraph& g, NodeId s, NodeId t, const PipelineParams& params,
                                   const EstimatorConfig& cfg) {
  const NodeId src[] = {s};
  const NodeId dst[] = {t};
  const QueryPair pair[] = {{s, t}};
  return prepare_query(g, src, dst, pair, params, cfg);
}

}  // namespace relmax
