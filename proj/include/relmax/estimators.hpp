#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relmax/common.hpp"
#include "relmax/graph.hpp"

namespace relmax {

enum class Method { exact, mc, rss, automatic };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::exact: return "exact";
    case Method::mc: return "mc";
    case Method::rss: return "rss";
    case Method::automatic: return "auto";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "exact") return Method::exact;
  if (s == "mc") return Method::mc;
  if (s == "rss") return Method::rss;
  if (s == "auto") return Method::automatic;
  throw InputError("unknown estimator '" + s + "'");
}

struct ReliabilityEstimate {
  double value = 0.0;
  double variance = 0.0;
  std::size_t samples_used = 0;
  Method method = Method::exact;
};

struct EstimatorConfig {
  // `automatic` runs the exact solver when the relevant edge count fits
  // `exact_cap` and recursive stratified sampling otherwise.
  Method method = Method::automatic;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  int branch_r = 5;
  std::size_t mc_threshold = 8;
  std::size_t exact_cap = 25;
  int max_depth = 64;
  unsigned workers = 1;
};

namespace detail {

enum : std::int8_t { kFree = 0, kOn = 1, kOff = -1 };

// Runs body(worker, begin, end) over [0, total) split into contiguous chunks.
template <class Body>
void parallel_chunks(std::size_t total, unsigned workers, Body&& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
  if (workers == 1) {
    body(0u, std::size_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (total + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t b = std::min(total, w * chunk);
    const std::size_t e = std::min(total, b + chunk);
    pool.emplace_back([&, w, b, e] { body(w, b, e); });
  }
  for (auto& th : pool) th.join();
}

// Nodes reachable from `source` through edges whose status passes `pass`.
template <class Pass>
void status_reach(const UncertainGraph& g, NodeId source, bool forward, const std::vector<std::int8_t>& status,
                  Pass&& pass, std::vector<char>& mark, std::vector<NodeId>& out) {
  out.clear();
  out.push_back(source);
  mark[source] = 1;
  for (std::size_t head = 0; head < out.size(); ++head) {
    for (const Arc& a : g.arcs(out[head], forward)) {
      if (mark[a.to] || !pass(status[a.edge])) continue;
      mark[a.to] = 1;
      out.push_back(a.to);
    }
  }
}

inline std::vector<std::int8_t> initial_status(const UncertainGraph& g) {
  std::vector<std::int8_t> st(g.edge_count(), kFree);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (g.edge(e).prob >= 1.0) st[e] = kOn;
    else if (g.edge(e).prob <= 0.0) st[e] = kOff;
  }
  return st;
}

// Exact two-terminal reliability by pivotal decomposition (factoring):
// R = p(e)·R(e present) + (1−p(e))·R(e absent), pivoting on uncertain edges
// that leave the set already certainly reached from s and can still lead to t.
class ExactSolver {
 public:
  ExactSolver(const UncertainGraph& g, NodeId s, NodeId t)
      : g_(g), s_(s), t_(t), status_(initial_status(g)), mark_(g.node_count(), 0),
        certain_(g.node_count(), 0), to_t_(g.node_count(), 0) {}

  std::size_t relevant_uncertain_edges() {
    std::vector<NodeId> fwd, bwd;
    auto open = [](std::int8_t st) { return st != kOff; };
    status_reach(g_, s_, true, status_, open, mark_, fwd);
    std::vector<char> from_s = mark_;
    for (NodeId v : fwd) mark_[v] = 0;
    status_reach(g_, t_, false, status_, open, mark_, bwd);
    std::vector<char> to_t = mark_;
    for (NodeId v : bwd) mark_[v] = 0;
    std::size_t count = 0;
    for (EdgeId e = 0; e < g_.edge_count(); ++e) {
      if (status_[e] != kFree) continue;
      const auto& pe = g_.edge(e);
      bool rel = from_s[pe.src] && to_t[pe.dst];
      if (!g_.directed()) rel = rel || (from_s[pe.dst] && to_t[pe.src]);
      count += rel;
    }
    return count;
  }

  double solve() {
    ++calls_;
    std::vector<NodeId> reached;
    status_reach(g_, s_, true, status_, [](std::int8_t st) { return st == kOn; }, mark_, reached);
    const bool done = mark_[t_];
    for (NodeId v : reached) certain_[v] = 1;
    for (NodeId v : reached) mark_[v] = 0;
    if (done) {
      for (NodeId v : reached) certain_[v] = 0;
      return 1.0;
    }
    // The remaining problem depends only on the reached set and on which
    // edges leaving it were ruled out.
    std::vector<std::uint64_t> key((g_.node_count() + g_.edge_count() + 63) / 64, 0);
    auto set_bit = [&key](std::size_t i) { key[i / 64] |= std::uint64_t{1} << (i % 64); };
    for (NodeId v : reached) {
      set_bit(v);
      for (const Arc& a : g_.out(v)) {
        if (status_[a.edge] == kOff && !certain_[a.to]) set_bit(g_.node_count() + a.edge);
      }
    }
    if (auto it = memo_.find(key); it != memo_.end()) {
      for (NodeId v : reached) certain_[v] = 0;
      return it->second;
    }
    // Nodes that can still reach t through edges not yet ruled out.
    std::vector<NodeId> back;
    status_reach(g_, t_, false, status_, [](std::int8_t st) { return st != kOff; }, mark_, back);
    for (NodeId v : back) to_t_[v] = 1;
    for (NodeId v : back) mark_[v] = 0;

    EdgeId pivot = 0;
    double best = -1.0;
    for (NodeId u : reached) {
      for (const Arc& a : g_.out(u)) {
        if (status_[a.edge] != kFree || certain_[a.to] || !to_t_[a.to]) continue;
        const double p = g_.edge(a.edge).prob;
        if (p > best || (p == best && a.edge < pivot)) {
          best = p;
          pivot = a.edge;
        }
      }
    }
    for (NodeId v : reached) certain_[v] = 0;
    for (NodeId v : back) to_t_[v] = 0;
    double value = 0.0;
    if (best >= 0.0) {
      status_[pivot] = kOn;
      const double on = solve();
      status_[pivot] = kOff;
      const double off = solve();
      status_[pivot] = kFree;
      value = best * on + (1.0 - best) * off;
    }
    if (memo_.size() < kMemoLimit) memo_.emplace(std::move(key), value);
    return value;
  }

  std::size_t calls() const noexcept { return calls_; }

 private:
  const UncertainGraph& g_;
  NodeId s_, t_;
  std::vector<std::int8_t> status_;
  std::vector<char> mark_, certain_, to_t_;
  std::size_t calls_ = 0;

  struct KeyHash {
    std::size_t operator()(const std::vector<std::uint64_t>& k) const noexcept {
      std::uint64_t h = 0;
      for (auto w : k) h = rng::mix64(h ^ w);
      return static_cast<std::size_t>(h);
    }
  };
  static constexpr std::size_t kMemoLimit = 1u << 20;
  std::unordered_map<std::vector<std::uint64_t>, double, KeyHash> memo_;
};

}  // namespace detail

/// Exact s-t reliability. Throws InfeasibleError when more than `edge_cap`
/// uncertain edges lie on some s-t route.
inline ReliabilityEstimate reliability_exact(const UncertainGraph& g, NodeId s, NodeId t,
                                             std::size_t edge_cap = 25) {
  if (s >= g.node_count() || t >= g.node_count()) throw InputError("query node out of range");
  if (s == t) return {1.0, 0.0, 0, Method::exact};
  detail::ExactSolver solver(g, s, t);
  const auto relevant = solver.relevant_uncertain_edges();
  if (relevant > edge_cap) {
    throw InfeasibleError("exact reliability needs " + std::to_string(relevant) +
                          " uncertain edges, cap is " + std::to_string(edge_cap));
  }
  const double v = std::clamp(solver.solve(), 0.0, 1.0);
  return {v, 0.0, 0, Method::exact};
}

/// Number of uncertain edges the exact solver would branch over.
inline std::size_t relevant_edge_count(const UncertainGraph& g, NodeId s, NodeId t) {
  if (s == t) return 0;
  detail::ExactSolver solver(g, s, t);
  return solver.relevant_uncertain_edges();
}

/// Plain Monte Carlo. World i is drawn from key (seed, i), so the result is
/// identical for any worker count.
inline ReliabilityEstimate reliability_mc(const UncertainGraph& g, NodeId s, NodeId t, std::size_t samples,
                                          std::uint64_t seed, unsigned workers = 1) {
  if (samples == 0) throw InputError("sample count must be positive");
  if (s >= g.node_count() || t >= g.node_count()) throw InputError("query node out of range");
  std::vector<std::size_t> hits(std::max(1u, workers), 0);
  detail::parallel_chunks(samples, workers, [&](unsigned w, std::size_t b, std::size_t e) {
    std::vector<char> mark(g.node_count(), 0);
    std::vector<NodeId> queue;
    std::size_t local = 0;
    for (std::size_t i = b; i < e; ++i) {
      const auto key = world_key(seed, i);
      local += s == t || bfs(
                             g, s, true, [&](EdgeId ed) { return rng::edge_present(key, ed, g.edge(ed).prob); },
                             [&](NodeId v) { return v == t; }, mark, queue);
    }
    hits[w] = local;
  });
  const double hit = static_cast<double>(std::accumulate(hits.begin(), hits.end(), std::size_t{0}));
  const double value = hit / static_cast<double>(samples);
  return {value, value * (1.0 - value) / static_cast<double>(samples), samples, Method::mc};
}

namespace detail {

// Recursive stratified sampling. Each level picks up to r uncertain edges on
// the frontier of the set certainly reached from the source and splits the
// space into r+1 disjoint strata: stratum i (1..r) has edge i present and
// edges 1..i-1 absent, stratum 0 has all r absent.
class RssSampler {
 public:
  // target == kNoNode switches to all-nodes mode (per-node reach frequencies).
  RssSampler(const UncertainGraph& g, NodeId source, NodeId target, bool forward, const EstimatorConfig& cfg)
      : g_(g), s_(source), t_(target), forward_(forward), cfg_(cfg), status_(initial_status(g)),
        mark_(g.node_count(), 0), to_t_(g.node_count(), 0) {
    if (t_ == kNoNode) per_node_.assign(g.node_count(), 0.0);
  }

  struct Outcome {
    double value;
    double variance;
  };

  Outcome run(std::size_t samples, std::uint64_t key) { return recurse(samples, key, 0, 1.0); }

  std::size_t samples_used() const noexcept { return used_; }
  const std::vector<double>& per_node() const noexcept { return per_node_; }

  // Probabilities of the strata produced at the root, for inspection.
  std::vector<double> root_strata() {
    std::vector<NodeId> reached;
    status_reach(g_, s_, forward_, status_, [](std::int8_t st) { return st == kOn; }, mark_, reached);
    const auto pivots = frontier(reached);
    for (NodeId v : reached) mark_[v] = 0;
    return strata_probabilities(pivots);
  }

 private:
  std::vector<double> strata_probabilities(const std::vector<EdgeId>& pivots) const {
    std::vector<double> pi(pivots.size() + 1);
    double none = 1.0;
    for (std::size_t i = 0; i < pivots.size(); ++i) {
      const double p = g_.edge(pivots[i]).prob;
      pi[i + 1] = none * p;
      none *= 1.0 - p;
    }
    pi[0] = none;
    return pi;
  }

  // Up to branch_r uncertain edges leaving the certain set; in s-t mode only
  // edges whose head can still reach t. `mark_` holds the certain set.
  std::vector<EdgeId> frontier(const std::vector<NodeId>& reached) {
    std::vector<EdgeId> cand;
    for (NodeId u : reached) {
      for (const Arc& a : g_.arcs(u, forward_)) {
        if (status_[a.edge] != kFree || mark_[a.to]) continue;
        if (t_ != kNoNode && !to_t_[a.to]) continue;
        cand.push_back(a.edge);
      }
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    const auto r = static_cast<std::size_t>(std::max(1, cfg_.branch_r));
    auto by_prob = [&](EdgeId a, EdgeId b) {
      const double pa = g_.edge(a).prob, pb = g_.edge(b).prob;
      return pa != pb ? pa > pb : a < b;
    };
    if (cand.size() > r) {
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(r), cand.end(), by_prob);
      cand.resize(r);
    } else {
      std::sort(cand.begin(), cand.end(), by_prob);
    }
    return cand;
  }

  Outcome recurse(std::size_t z, std::uint64_t key, int depth, double weight) {
    std::vector<NodeId> reached, back;
    status_reach(g_, s_, forward_, status_, [](std::int8_t st) { return st == kOn; }, mark_, reached);
    if (t_ != kNoNode) {
      const bool hit = mark_[t_];
      for (NodeId v : reached) mark_[v] = 0;
      if (hit) return {1.0, 0.0};
      status_reach(g_, t_, !forward_, status_, [](std::int8_t st) { return st != kOff; }, mark_, back);
      for (NodeId v : back) mark_[v] = 0;
      if (!std::any_of(back.begin(), back.end(), [&](NodeId v) { return v == s_; })) return {0.0, 0.0};
      for (NodeId v : back) to_t_[v] = 1;
      for (NodeId v : reached) mark_[v] = 1;
    }
    const auto pivots = frontier(reached);
    for (NodeId v : reached) mark_[v] = 0;
    for (NodeId v : back) to_t_[v] = 0;

    if (pivots.empty()) {
      // Outcome fully determined by the fixed statuses.
      if (t_ == kNoNode) {
        for (NodeId v : reached) per_node_[v] += weight;
      }
      return {0.0, 0.0};
    }
    if (z < std::max<std::size_t>(cfg_.mc_threshold, 1) || depth >= cfg_.max_depth) {
      return sample_leaf(std::max<std::size_t>(z, 1), key, weight);
    }

    const auto pi = strata_probabilities(pivots);
    std::vector<std::size_t> alloc(pi.size());
    std::size_t total = 0, largest = 0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
      alloc[i] = static_cast<std::size_t>(std::llround(pi[i] * static_cast<double>(z)));
      total += alloc[i];
      if (pi[i] > pi[largest]) largest = i;
    }
    if (total < z) {
      alloc[largest] += z - total;
    } else if (total > z) {
      alloc[largest] -= std::min(alloc[largest] - 1, total - z);
    }
    // A stratum with positive mass always gets at least one sample; otherwise
    // its contribution would silently be dropped and the estimate biased.
    for (std::size_t i = 0; i < pi.size(); ++i) {
      if (pi[i] > 0.0 && alloc[i] == 0) alloc[i] = 1;
    }

    Outcome acc{0.0, 0.0};
    auto visit = [&](std::size_t i) {
      if (pi[i] <= 0.0) return;
      const auto sub = recurse(alloc[i], rng::derive(key, i), depth + 1, weight * pi[i]);
      acc.value += pi[i] * sub.value;
      acc.variance += pi[i] * pi[i] * sub.variance;
    };
    // Stratum 0: every pivot absent.
    for (EdgeId e : pivots) status_[e] = kOff;
    visit(0);
    for (std::size_t i = 0; i < pivots.size(); ++i) {
      for (std::size_t j = 0; j < pivots.size(); ++j) status_[pivots[j]] = j < i ? kOff : kFree;
      status_[pivots[i]] = kOn;
      visit(i + 1);
    }
    for (EdgeId e : pivots) status_[e] = kFree;
    return acc;
  }

  Outcome sample_leaf(std::size_t z, std::uint64_t key, double weight) {
    used_ += z;
    std::vector<NodeId> queue;
    std::size_t hits = 0;
    for (std::size_t j = 0; j < z; ++j) {
      const auto wk = rng::derive(key, j);
      auto present = [&](EdgeId e) {
        const auto st = status_[e];
        if (st != kFree) return st == kOn;
        return rng::edge_present(wk, e, g_.edge(e).prob);
      };
      if (t_ != kNoNode) {
        hits += bfs(g_, s_, forward_, present, [&](NodeId v) { return v == t_; }, mark_, queue);
      } else {
        bfs(g_, s_, forward_, present, [](NodeId) { return false; }, mark_, queue);
        const double w = weight / static_cast<double>(z);
        for (NodeId v : queue) per_node_[v] += w;
      }
    }
    const double f = static_cast<double>(hits) / static_cast<double>(z);
    return {f, f * (1.0 - f) / static_cast<double>(z)};
  }

  const UncertainGraph& g_;
  NodeId s_, t_;
  bool forward_;
  EstimatorConfig cfg_;
  std::vector<std::int8_t> status_;
  std::vector<char> mark_, to_t_;
  std::vector<double> per_node_;
  std::size_t used_ = 0;
};

}  // namespace detail

/// Recursive stratified sampling estimate of R(s,t). Unbiased; the variance
/// field is the stratified plug-in variance sum(pi_i^2 * var_i).
inline ReliabilityEstimate reliability_rss(const UncertainGraph& g, NodeId s, NodeId t, std::size_t samples,
                                           std::uint64_t seed, int branch_r = 5, std::size_t mc_threshold = 8) {
  if (samples == 0) throw InputError("sample count must be positive");
  if (branch_r < 1) throw InputError("branch_r must be at least 1");
  if (s >= g.node_count() || t >= g.node_count()) throw InputError("query node out of range");
  if (s == t) return {1.0, 0.0, 0, Method::rss};
  EstimatorConfig cfg;
  cfg.branch_r = branch_r;
  cfg.mc_threshold = mc_threshold;
  detail::RssSampler sampler(g, s, t, true, cfg);
  const auto out = sampler.run(samples, rng::derive(seed, 0x5253ULL));
  return {std::clamp(out.value, 0.0, 1.0), out.variance, sampler.samples_used(), Method::rss};
}

inline ReliabilityEstimate reliability_rss(const UncertainGraph& g, NodeId s, NodeId t,
                                           const EstimatorConfig& cfg) {
  if (cfg.samples == 0) throw InputError("sample count must be positive");
  if (cfg.branch_r < 1) throw InputError("branch_r must be at least 1");
  if (s == t) return {1.0, 0.0, 0, Method::rss};
  detail::RssSampler sampler(g, s, t, true, cfg);
  const auto out = sampler.run(cfg.samples, rng::derive(cfg.seed, 0x5253ULL));
  return {std::clamp(out.value, 0.0, 1.0), out.variance, sampler.samples_used(), Method::rss};
}

/// Root-level stratum probabilities RSS would use for (s, ·); sums to one.
inline std::vector<double> rss_root_strata(const UncertainGraph& g, NodeId s, int branch_r = 5) {
  EstimatorConfig cfg;
  cfg.branch_r = branch_r;
  detail::RssSampler sampler(g, s, kNoNode, true, cfg);
  return sampler.root_strata();
}

/// Dispatches on cfg.method.
inline ReliabilityEstimate estimate(const UncertainGraph& g, NodeId s, NodeId t, const EstimatorConfig& cfg) {
  switch (cfg.method) {
    case Method::exact: return reliability_exact(g, s, t, cfg.exact_cap);
    case Method::mc: return reliability_mc(g, s, t, cfg.samples, cfg.seed, cfg.workers);
    case Method::rss: return reliability_rss(g, s, t, cfg);
    case Method::automatic:
      if (relevant_edge_count(g, s, t) <= cfg.exact_cap) return reliability_exact(g, s, t, cfg.exact_cap);
      return reliability_rss(g, s, t, cfg);
  }
  return {};
}

namespace detail {

inline std::vector<double> reliability_all(const UncertainGraph& g, NodeId root, bool forward, std::size_t samples,
                                           std::uint64_t seed, Method method, const EstimatorConfig& cfg) {
  if (samples == 0) throw InputError("sample count must be positive");
  if (root >= g.node_count()) throw InputError("query node out of range");
  const std::size_t n = g.node_count();
  if (method == Method::rss) {
    EstimatorConfig c = cfg;
    c.samples = samples;
    RssSampler sampler(g, root, kNoNode, forward, c);
    sampler.run(samples, rng::derive(seed, 0x5253ULL));
    auto out = sampler.per_node();
    for (auto& x : out) x = std::clamp(x, 0.0, 1.0);
    out[root] = 1.0;
    return out;
  }
  if (method != Method::mc) throw InputError("all-nodes reliability supports mc and rss only");
  const unsigned workers = std::max(1u, cfg.workers);
  std::vector<std::vector<std::uint32_t>> counts(workers);
  parallel_chunks(samples, workers, [&](unsigned w, std::size_t b, std::size_t e) {
    auto& cnt = counts[w];
    cnt.assign(n, 0);
    std::vector<char> mark(n, 0);
    std::vector<NodeId> queue;
    for (std::size_t i = b; i < e; ++i) {
      const auto key = world_key(seed, i);
      bfs(
          g, root, forward, [&](EdgeId ed) { return rng::edge_present(key, ed, g.edge(ed).prob); },
          [](NodeId) { return false; }, mark, queue);
      for (NodeId v : queue) ++cnt[v];
    }
  });
  std::vector<double> out(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    std::uint64_t c = 0;
    for (const auto& cnt : counts) c += cnt.empty() ? 0 : cnt[v];
    out[v] = static_cast<double>(c) / static_cast<double>(samples);
  }
  return out;
}

}  // namespace detail

/// Reliability from `s` to every node, one BFS per sampled world.
inline std::vector<double> reliability_all_from(const UncertainGraph& g, NodeId s, std::size_t samples,
                                                std::uint64_t seed, Method method = Method::rss,
                                                const EstimatorConfig& cfg = {}) {
  return detail::reliability_all(g, s, true, samples, seed, method, cfg);
}

/// Reliability from every node to `t` (searches the reversed graph).
inline std::vector<double> reliability_all_to(const UncertainGraph& g, NodeId t, std::size_t samples,
                                              std::uint64_t seed, Method method = Method::rss,
                                              const EstimatorConfig& cfg = {}) {
  return detail::reliability_all(g, t, false, samples, seed, method, cfg);
}

// ---------------------------------------------------------------------------
// Sample-size selection by index of dispersion
// ---------------------------------------------------------------------------

struct DispersionStats {
  std::size_t samples = 0;
  double rho = 0.0;
  int repeats = 0;
  double mean_variance = 0.0;     // V_Z
  double mean_reliability = 0.0;  // R_Z
};

struct SampleSizeChoice {
  std::size_t samples = 0;
  bool converged = false;
  std::vector<DispersionStats> grid;
};

/// Smallest Z in `grid` whose index of dispersion V_Z / R_Z falls below
/// `threshold`. V_Z is the across-repeat sample variance of the estimate,
/// averaged over queries; R_Z is the mean estimate. When no grid point
/// converges the largest is returned with converged = false.
inline SampleSizeChoice converged_sample_size(const UncertainGraph& g,
                                              std::span<const std::pair<NodeId, NodeId>> queries,
                                              std::vector<std::size_t> grid, int repeats = 30,
                                              double threshold = 1e-3, EstimatorConfig cfg = {}) {
  if (threshold <= 0.0) throw InputError("dispersion threshold must be positive");
  if (grid.empty() || queries.empty()) throw InputError("need a non-empty grid and query list");
  if (repeats < 2) throw InputError("need at least two repeats");
  if (cfg.method == Method::exact || cfg.method == Method::automatic) cfg.method = Method::rss;
  std::sort(grid.begin(), grid.end());
  SampleSizeChoice choice;
  for (std::size_t z : grid) {
    DispersionStats st;
    st.samples = z;
    st.repeats = repeats;
    double var_sum = 0.0, mean_sum = 0.0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      std::vector<double> vals;
      for (int rep = 0; rep < repeats; ++rep) {
        EstimatorConfig c = cfg;
        c.samples = z;
        c.seed = rng::derive(rng::derive(cfg.seed, q), static_cast<std::uint64_t>(rep));
        vals.push_back(estimate(g, queries[q].first, queries[q].second, c).value);
      }
      const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / repeats;
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      var_sum += ss / (repeats - 1);
      mean_sum += mean;
    }
    st.mean_variance = var_sum / static_cast<double>(queries.size());
    st.mean_reliability = mean_sum / static_cast<double>(queries.size());
    if (st.mean_reliability <= 0.0) {
      throw InputError("index of dispersion undefined: every query has zero reliability");
    }
    st.rho = st.mean_variance / st.mean_reliability;
    choice.grid.push_back(st);
    if (st.rho < threshold) {
      choice.samples = z;
      choice.converged = true;
      return choice;
    }
  }
  choice.samples = grid.back();
  return choice;
}

}  // namespace relmax
