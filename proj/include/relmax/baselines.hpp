#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "relmax/candidates.hpp"
#include "relmax/common.hpp"
#include "relmax/estimators.hpp"
#include "relmax/graph.hpp"
#include "relmax/selection.hpp"

namespace relmax {

/// Top-k candidates by individual reliability gain, ties by candidate id.
inline SelectionResult select_individual_topk(const UncertainGraph& g, const CandidateSet& cands, NodeId s, NodeId t,
                                              std::size_t k, const EstimatorConfig& cfg) {
  if (k < 1) throw InputError("k must be at least 1");
  const QueryPair pair[] = {{s, t}};
  SelectionResult res;
  const double base = detail::full_objective(g, {}, pair, cfg);
  TraceRound round;
  round.round = 1;
  for (const auto& c : cands.edges) {
    const CandidateEdge one[] = {c};
    const double gain = detail::full_objective(g, one, pair, cfg) - base;
    round.evaluations.push_back({{c.id}, gain, gain});
  }
  auto ranked = round.evaluations;
  std::stable_sort(ranked.begin(), ranked.end(), [](const Evaluation& a, const Evaluation& b) {
    return !detail::nearly_equal(a.gain, b.gain) && a.gain > b.gain;
  });
  ranked.resize(std::min(k, ranked.size()));
  for (const auto& e : ranked) round.added.push_back(e.label.front());
  std::sort(round.added.begin(), round.added.end());
  round.label = round.added;
  res.chosen = detail::to_edges(cands, round.added);
  res.trace.push_back(std::move(round));
  detail::finalize(res, g, pair, Aggregate::avg, cfg);
  res.trace.back().gain = res.gain;
  res.trace.back().objective = res.new_reliability;
  return res;
}

/// Greedy hill climbing: k rounds, each inserting the candidate with the
/// largest marginal gain. A round whose best gain is negative ends the run.
inline SelectionResult select_hill_climbing(const UncertainGraph& g, const CandidateSet& cands, NodeId s, NodeId t,
                                            std::size_t k, const EstimatorConfig& cfg) {
  if (k < 1) throw InputError("k must be at least 1");
  const QueryPair pair[] = {{s, t}};
  SelectionResult res;
  std::vector<CandidateEdge> chosen;
  std::vector<char> used(cands.size(), 0);
  double current = detail::full_objective(g, {}, pair, cfg);
  for (std::size_t r = 0; r < k && chosen.size() < cands.size(); ++r) {
    TraceRound round;
    round.round = r + 1;
    std::size_t best = cands.size();
    double best_value = 0.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (used[i]) continue;
      auto trial = chosen;
      trial.push_back(cands.edges[i]);
      double var = 0.0;
      const double value = detail::full_objective(g, trial, pair, cfg, &var);
      round.evaluations.push_back({{cands.edges[i].id}, value - current, value - current});
      if (best == cands.size() || (value > best_value && !detail::nearly_equal(value, best_value))) {
        best = i;
        best_value = value;
        round.variance = var;
      }
    }
    if (best == cands.size() || best_value - current < 0.0) break;
    used[best] = 1;
    chosen.push_back(cands.edges[best]);
    round.label = round.added = {cands.edges[best].id};
    round.gain = best_value - current;
    round.objective = best_value;
    current = best_value;
    res.trace.push_back(std::move(round));
  }
  std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  res.chosen = std::move(chosen);
  detail::finalize(res, g, pair, Aggregate::avg, cfg);
  return res;
}

enum class Centrality { degree, betweenness };

/// Sum of incident edge probabilities (in plus out for directed graphs).
inline std::vector<double> degree_centrality(const UncertainGraph& g) {
  std::vector<double> c(g.node_count(), 0.0);
  for (const auto& e : g.edges()) {
    c[e.src] += e.prob;
    c[e.dst] += e.prob;
  }
  return c;
}

/// Brandes betweenness on the unweighted skeleton, following edge
/// direction for directed graphs. Undirected scores count each unordered
/// pair once.
inline std::vector<double> betweenness_centrality(const UncertainGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> cb(n, 0.0), delta(n);
  std::vector<double> sigma(n);
  std::vector<int> dist(n);
  std::vector<std::vector<NodeId>> preds(n);
  std::vector<NodeId> order;
  std::queue<NodeId> q;
  for (NodeId s = 0; s < n; ++s) {
    order.clear();
    for (NodeId v = 0; v < n; ++v) {
      preds[v].clear();
      sigma[v] = 0.0;
      dist[v] = -1;
      delta[v] = 0.0;
    }
    sigma[s] = 1.0;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const NodeId v = q.front();
      q.pop();
      order.push_back(v);
      for (const Arc& a : g.out(v)) {
        const NodeId w = a.to;
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeId w = *it;
      for (NodeId v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  if (!g.directed()) {
    for (auto& x : cb) x /= 2.0;
  }
  return cb;
}

/// Connects candidate pairs in descending order of the endpoints' summed
/// centrality (ties by candidate id) until k are chosen.
inline SelectionResult select_centrality(const UncertainGraph& g, const CandidateSet& cands, NodeId s, NodeId t,
                                         std::size_t k, Centrality mode, const EstimatorConfig& cfg) {
  if (k < 1) throw InputError("k must be at least 1");
  const auto c = mode == Centrality::degree ? degree_centrality(g) : betweenness_centrality(g);
  std::vector<Evaluation> ranked;
  for (const auto& e : cands.edges) {
    const double score = c[e.src] + c[e.dst];
    ranked.push_back({{e.id}, 0.0, score});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Evaluation& a, const Evaluation& b) {
    return !detail::nearly_equal(a.score, b.score) && a.score > b.score;
  });
  SelectionResult res;
  TraceRound round;
  round.round = 1;
  round.note = mode == Centrality::degree ? "degree" : "betweenness";
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) round.added.push_back(ranked[i].label.front());
  std::sort(round.added.begin(), round.added.end());
  round.label = round.added;
  round.evaluations = std::move(ranked);
  res.chosen = detail::to_edges(cands, round.added);
  res.trace.push_back(std::move(round));
  const QueryPair pair[] = {{s, t}};
  detail::finalize(res, g, pair, Aggregate::avg, cfg);
  res.trace.back().gain = res.gain;
  res.trace.back().objective = res.new_reliability;
  return res;
}

struct EigenScores {
  double lambda = 0.0;
  std::vector<double> u;  // left eigenvector, unit length
  std::vector<double> v;  // right eigenvector, unit length
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  std::size_t iterations = 0;
};

namespace detail {

// Power iteration on (A + I) or its transpose. Returns the unit vector and
// the iteration count; throws when it does not settle.
inline std::pair<std::vector<double>, std::size_t> power_iterate(const UncertainGraph& g, bool transpose,
                                                                 double tol, std::size_t max_iter) {
  const std::size_t n = g.node_count();
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), y(n);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    y = x;
    for (const auto& e : g.edges()) {
      if (!g.directed()) {
        y[e.src] += e.prob * x[e.dst];
        y[e.dst] += e.prob * x[e.src];
      } else if (transpose) {
        y[e.dst] += e.prob * x[e.src];
      } else {
        y[e.src] += e.prob * x[e.dst];
      }
    }
    double norm = 0.0;
    for (double a : y) norm += a * a;
    norm = std::sqrt(norm);
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] /= norm;
      diff = std::max(diff, std::abs(y[i] - x[i]));
    }
    x.swap(y);
    if (diff < tol) return {x, it};
  }
  throw InfeasibleError("power iteration did not converge in " + std::to_string(max_iter) + " iterations");
}

}  // namespace detail

/// Leading eigenvalue and eigenvectors of the probability-weighted
/// adjacency matrix A (A[u][v] = p(u,v)).
inline EigenScores eigen_scores(const UncertainGraph& g, double tol = 1e-10, std::size_t max_iter = 10000) {
  if (g.node_count() == 0) throw InputError("empty graph");
  EigenScores out;
  auto [v, it_v] = detail::power_iterate(g, false, tol, max_iter);
  out.v = std::move(v);
  out.iterations = it_v;
  if (g.directed()) {
    auto [u, it_u] = detail::power_iterate(g, true, tol, max_iter);
    out.u = std::move(u);
    out.iterations = std::max(out.iterations, it_u);
  } else {
    out.u = out.v;
  }
  // Rayleigh quotient of the right vector (unit length).
  std::vector<double> av(g.node_count(), 0.0);
  for (const auto& e : g.edges()) {
    av[e.src] += e.prob * out.v[e.dst];
    if (!g.directed()) av[e.dst] += e.prob * out.v[e.src];
  }
  for (std::size_t i = 0; i < av.size(); ++i) out.lambda += av[i] * out.v[i];
  for (NodeId x = 0; x < g.node_count(); ++x) {
    out.d_in = std::max(out.d_in, g.in(x).size());
    out.d_out = std::max(out.d_out, g.out(x).size());
  }
  return out;
}

/// Eigenvalue baseline: among candidates (i, j) with i in the top-(k+d_in)
/// nodes by left score and j in the top-(k+d_out) by right score, the k with
/// the largest u(i)·v(j).
inline SelectionResult select_eigen(const UncertainGraph& g, const CandidateSet& cands, NodeId s, NodeId t,
                                    std::size_t k, const EstimatorConfig& cfg) {
  if (k < 1) throw InputError("k must be at least 1");
  const auto es = eigen_scores(g);
  const std::size_t n = g.node_count();
  auto top = [&](const std::vector<double>& score, std::size_t count) {
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return score[a] > score[b]; });
    order.resize(std::min(count, n));
    std::vector<char> in(n, 0);
    for (NodeId x : order) in[x] = 1;
    return in;
  };
  const auto in_i = top(es.u, k + es.d_in);
  const auto in_j = top(es.v, k + es.d_out);
  std::vector<Evaluation> ranked;
  for (const auto& e : cands.edges) {
    const bool fwd = in_i[e.src] && in_j[e.dst];
    double score = es.u[e.src] * es.v[e.dst];
    if (!g.directed()) {
      // Either orientation of an undirected pair may qualify.
      const bool rev = in_i[e.dst] && in_j[e.src];
      if (!fwd && !rev) continue;
      score = std::max(fwd ? score : 0.0, rev ? es.u[e.dst] * es.v[e.src] : 0.0);
    } else if (!fwd) {
      continue;
    }
    ranked.push_back({{e.id}, 0.0, score});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Evaluation& a, const Evaluation& b) {
    return a.score > b.score;
  });
  SelectionResult res;
  TraceRound round;
  round.round = 1;
  round.note = "eigen";
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) round.added.push_back(ranked[i].label.front());
  std::sort(round.added.begin(), round.added.end());
  round.label = round.added;
  round.evaluations = std::move(ranked);
  res.chosen = detail::to_edges(cands, round.added);
  res.trace.push_back(std::move(round));
  const QueryPair pair[] = {{s, t}};
  detail::finalize(res, g, pair, Aggregate::avg, cfg);
  res.trace.back().gain = res.gain;
  res.trace.back().objective = res.new_reliability;
  return res;
}

}  // namespace relmax
