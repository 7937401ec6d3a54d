#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "relmax/baselines.hpp"
#include "relmax/candidates.hpp"
#include "relmax/common.hpp"
#include "relmax/estimators.hpp"
#include "relmax/graph.hpp"
#include "relmax/mrp_layered.hpp"
#include "relmax/multi_st.hpp"
#include "relmax/paths.hpp"
#include "relmax/selection.hpp"

namespace relmax {

inline constexpr const char* kCsvHeader = "method,k,zeta,r,l,h,base_rel,new_rel,gain,time_ms,samples,edges_added";

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"exact", "topk", "hc", "cent-deg", "cent-bet", "eigen", "mrp", "ip", "be"};
  return m;
}

struct RunConfig {
  std::string graph;
  std::optional<bool> directed;
  std::vector<std::string> methods{"be"};
  std::size_t k = 10;
  double zeta = 0.5;
  std::size_t r = 100;
  std::size_t l = 30;
  int h = 3;
  std::size_t samples = 1000;
  bool auto_samples = false;
  std::uint64_t seed = 1;
  Aggregate aggregate = Aggregate::avg;
  double k1_ratio = 0.10;
  std::string output;
  std::string prob_overrides;
  std::string candidates;  // explicit candidate list; skips elimination
  std::string trace;
  unsigned workers = 1;
  bool timing = true;
  Method estimator = Method::automatic;
};

struct RunRecord {
  std::string method;
  std::size_t k = 0;
  double zeta = 0.0;
  std::size_t r = 0, l = 0;
  int h = 0;
  double base_rel = 0.0, new_rel = 0.0, gain = 0.0, time_ms = 0.0;
  std::size_t samples = 0;
  double edges_added = 0.0;
  std::vector<CandidateEdge> chosen;
  std::vector<std::string> trace;
};

inline void validate(const RunConfig& c) {
  if (c.methods.empty()) throw InputError("method list is empty");
  for (const auto& m : c.methods) {
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
      throw InputError("unknown method '" + m + "'");
    }
  }
  if (c.k < 1) throw InputError("k must be at least 1");
  if (!(c.zeta > 0.0 && c.zeta <= 1.0)) throw InputError("zeta must lie in (0, 1]");
  if (c.r < 1) throw InputError("r must be at least 1");
  if (c.l < 1 || c.l > kMaxPathCount) throw InputError("l must lie in [1, " + std::to_string(kMaxPathCount) + "]");
  if (c.h < 1) throw InputError("h must be at least 1");
  if (c.samples < 1) throw InputError("samples must be at least 1");
  if (!(c.k1_ratio > 0.0 && c.k1_ratio <= 1.0)) throw InputError("k1 ratio must lie in (0, 1]");
}

/// Graph plus the optional side files named by a config.
struct LoadedInput {
  UncertainGraph graph;
  std::optional<ProbOverrides> overrides;
  std::optional<CandidateSet> candidates;
  std::vector<std::string> warnings;
};

inline LoadedInput load_input(const RunConfig& c) {
  LoadedInput in;
  LoadOptions opts;
  opts.directed = c.directed;
  opts.warnings = &in.warnings;
  in.graph = load_graph(c.graph, opts);
  if (!c.prob_overrides.empty()) in.overrides = load_prob_overrides(c.prob_overrides, in.graph);
  if (!c.candidates.empty()) in.candidates = load_candidates(c.candidates, in.graph);
  return in;
}

namespace detail {

inline std::string edge_label(const UncertainGraph& g, const CandidateEdge& c) {
  return g.names().label(c.src) + (g.directed() ? "->" : "--") + g.names().label(c.dst);
}

inline std::string format_trace(const UncertainGraph& g, const CandidateSet& cands, const std::string& tag,
                                const TraceRound& round) {
  auto names = [&](const std::vector<CandidateId>& ids) {
    std::string out;
    for (CandidateId id : ids) {
      if (!out.empty()) out += ',';
      out += cands.contains(id) ? edge_label(g, cands.at(id)) : "#" + std::to_string(id);
    }
    return out.empty() ? std::string("-") : out;
  };
  std::string line = tag + " round=" + std::to_string(round.round) + " label=" + names(round.label) +
                     " added=" + names(round.added) + " gain=" + format_double(round.gain) +
                     " objective=" + format_double(round.objective);
  if (!round.note.empty()) line += " note=" + round.note;
  return line;
}

inline EstimatorConfig estimator_for(const RunConfig& c, std::uint64_t seed) {
  EstimatorConfig e;
  e.method = c.estimator;
  e.samples = c.samples;
  e.seed = seed;
  e.workers = 1;
  return e;
}

}  // namespace detail

/// Runs one method on one s-t query. Query i should pass seed = master ^ i.
inline RunRecord run_query(const LoadedInput& in, const RunConfig& c, const std::string& method, NodeId s, NodeId t,
                           std::uint64_t seed) {
  const auto& g = in.graph;
  if (s >= g.node_count() || t >= g.node_count()) throw InputError("query node out of range");
  RunRecord rec;
  rec.method = method;
  rec.k = c.k;
  rec.zeta = c.zeta;
  rec.r = c.r;
  rec.l = c.l;
  rec.h = c.h;
  auto cfg = detail::estimator_for(c, seed);
  if (c.auto_samples) {
    const QueryPair q[] = {{s, t}};
    try {
      cfg.samples = converged_sample_size(g, q, {100, 250, 500, 1000, 2500, 5000, 10000}, 30, 1e-3, cfg).samples;
    } catch (const InputError&) {
      // Zero reliability everywhere: keep the configured sample count.
    }
  }
  const ProbOverrides* overrides = in.overrides ? &*in.overrides : nullptr;
  PipelineParams pp;
  pp.r = c.r;
  pp.h = c.h;
  pp.zeta = c.zeta;
  pp.l = c.l;
  pp.overrides = overrides;
  auto eliminated = [&] {
    if (in.candidates) return *in.candidates;
    EliminationParams ep;
    ep.r = c.r;
    ep.h = c.h;
    ep.zeta = c.zeta;
    ep.overrides = overrides;
    ep.estimator = cfg;
    if (ep.estimator.method != Method::mc) ep.estimator.method = Method::rss;
    return eliminate(g, s, t, ep);
  };

  const auto start = std::chrono::steady_clock::now();
  SelectionResult res;
  CandidateSet used;
  if (method == "ip" || method == "be") {
    PreparedQuery prep;
    if (in.candidates) {
      const auto aug = augment(g, *in.candidates);
      prep.paths = top_l_paths(aug.graph, s, t, c.l, aug.map);
      prep.candidates = prune_by_paths(*in.candidates, prep.paths);
    } else {
      prep = prepare_query(g, s, t, pp, cfg);
    }
    used = prep.candidates;
    res = method == "ip" ? select_ip(g, used, prep.paths, s, t, c.k, cfg)
                         : select_be(g, used, prep.paths, s, t, c.k, cfg);
  } else if (method == "mrp") {
    if (in.candidates) {
      used = *in.candidates;
    } else if (g.node_count() <= kFullLayeredNodeLimit) {
      used = complete_candidates(g, c.zeta, overrides);
    } else {
      used = eliminated();
    }
    const auto imp = improve_mrp(g, used, s, t, static_cast<int>(c.k));
    res.chosen = imp.chosen;
    TraceRound round;
    round.round = 1;
    for (const auto& e : imp.chosen) round.added.push_back(e.id);
    round.label = round.added;
    round.gain = imp.new_prob - imp.base_prob;
    round.objective = imp.new_prob;
    round.note = imp.unreachable ? "unreachable" : "mrp";
    res.trace.push_back(round);
    const QueryPair q[] = {{s, t}};
    detail::finalize(res, g, q, Aggregate::avg, cfg);
  } else {
    used = eliminated();
    if (method == "exact") res = select_exact(g, used, s, t, c.k, cfg);
    else if (method == "topk") res = select_individual_topk(g, used, s, t, c.k, cfg);
    else if (method == "hc") res = select_hill_climbing(g, used, s, t, c.k, cfg);
    else if (method == "cent-deg") res = select_centrality(g, used, s, t, c.k, Centrality::degree, cfg);
    else if (method == "cent-bet") res = select_centrality(g, used, s, t, c.k, Centrality::betweenness, cfg);
    else if (method == "eigen") res = select_eigen(g, used, s, t, c.k, cfg);
    else throw InputError("unknown method '" + method + "'");
  }
  const auto stop = std::chrono::steady_clock::now();
  rec.time_ms = c.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  rec.base_rel = res.base_reliability;
  rec.new_rel = res.new_reliability;
  rec.gain = res.gain;
  rec.samples = res.samples;
  rec.edges_added = static_cast<double>(res.chosen.size());
  rec.chosen = res.chosen;
  const std::string tag = "method=" + method + " s=" + g.names().label(s) + " t=" + g.names().label(t);
  for (const auto& round : res.trace) rec.trace.push_back(detail::format_trace(g, used, tag, round));
  return rec;
}

/// One multi-pair query under the configured aggregate.
inline RunRecord run_multi_query(const LoadedInput& in, const RunConfig& c, const MultiQuery& query,
                                 std::uint64_t seed) {
  const auto& g = in.graph;
  MultiQuery q = query;
  q.aggregate = c.aggregate;
  q.k = c.k;
  q.k1_ratio = c.k1_ratio;
  MultiParams mp;
  mp.pipeline.r = c.r;
  mp.pipeline.h = c.h;
  mp.pipeline.zeta = c.zeta;
  mp.pipeline.l = c.l;
  mp.pipeline.overrides = in.overrides ? &*in.overrides : nullptr;
  mp.estimator = detail::estimator_for(c, seed);
  RunRecord rec;
  rec.method = std::string("be-") + to_string(c.aggregate);
  rec.k = c.k;
  rec.zeta = c.zeta;
  rec.r = c.r;
  rec.l = c.l;
  rec.h = c.h;
  const auto start = std::chrono::steady_clock::now();
  const auto res = select_multi(g, q, mp);
  const auto stop = std::chrono::steady_clock::now();
  rec.time_ms = c.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  rec.base_rel = res.base_reliability;
  rec.new_rel = res.new_reliability;
  rec.gain = res.gain;
  rec.samples = res.samples;
  rec.edges_added = static_cast<double>(res.chosen.size());
  rec.chosen = res.chosen;
  CandidateSet shown;
  shown.edges = res.chosen;
  std::sort(shown.edges.begin(), shown.edges.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& round : res.trace) rec.trace.push_back(detail::format_trace(g, shown, rec.method, round));
  return rec;
}

inline std::string csv_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.method << ',' << r.k << ',' << detail::format_double(r.zeta) << ',' << r.r << ',' << r.l << ',' << r.h << ','
     << detail::format_double(r.base_rel) << ',' << detail::format_double(r.new_rel) << ',' << detail::format_double(r.gain) << ','
     << detail::format_double(r.time_ms) << ',' << r.samples << ',' << detail::format_double(r.edges_added);
  return os.str();
}

/// Runs `job(i)` for i in [0, count) on up to `workers` threads; results are
/// stored by index so output order never depends on scheduling.
template <class Job>
auto fan_out(std::size_t count, unsigned workers, Job&& job) {
  using R = decltype(job(std::size_t{0}));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i] = job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (w == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < w; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::vector<R> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

/// Parameter sweep: every method at every k, zeta, r, l, h combination;
/// each row averages over all queries.
struct Sweep {
  std::vector<std::size_t> k;
  std::vector<double> zeta;
  std::vector<std::size_t> r;
  std::vector<std::size_t> l;
  std::vector<int> h;
};

inline std::vector<RunRecord> run_experiment(const LoadedInput& in, const RunConfig& base, const Sweep& sweep,
                                             std::span<const QueryPair> queries) {
  validate(base);
  if (queries.empty()) throw InputError("experiment needs at least one query");
  auto or_default = [](auto list, auto value) {
    if (list.empty()) list.push_back(value);
    return list;
  };
  const auto ks = or_default(sweep.k, base.k);
  const auto zetas = or_default(sweep.zeta, base.zeta);
  const auto rs = or_default(sweep.r, base.r);
  const auto ls = or_default(sweep.l, base.l);
  const auto hs = or_default(sweep.h, base.h);
  std::vector<RunRecord> rows;
  for (const auto& method : base.methods) {
    for (auto k : ks) {
      for (auto zeta : zetas) {
        for (auto r : rs) {
          for (auto l : ls) {
            for (auto h : hs) {
              RunConfig c = base;
              c.k = k;
              c.zeta = zeta;
              c.r = r;
              c.l = l;
              c.h = h;
              validate(c);
              const auto recs = fan_out(queries.size(), c.workers, [&](std::size_t i) {
                return run_query(in, c, method, queries[i].first, queries[i].second, c.seed ^ i);
              });
              RunRecord row;
              row.method = method;
              row.k = k;
              row.zeta = zeta;
              row.r = r;
              row.l = l;
              row.h = h;
              for (const auto& rec : recs) {
                row.base_rel += rec.base_rel;
                row.new_rel += rec.new_rel;
                row.gain += rec.gain;
                row.time_ms += rec.time_ms;
                row.samples = std::max(row.samples, rec.samples);
                row.edges_added += rec.edges_added;
                row.trace.insert(row.trace.end(), rec.trace.begin(), rec.trace.end());
              }
              const double q = static_cast<double>(recs.size());
              row.base_rel /= q;
              row.new_rel /= q;
              row.gain /= q;
              row.time_ms /= q;
              row.edges_added /= q;
              rows.push_back(std::move(row));
            }
          }
        }
      }
    }
  }
  return rows;
}

/// Reads `s t` query lines (labels of `g`).
inline std::vector<QueryPair> load_queries(const std::string& path, const UncertainGraph& g) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open query file '" + path + "'");
  std::vector<QueryPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tok = detail::split_ws(view);
    if (tok.empty()) continue;
    const auto where = path + ": line " + std::to_string(lineno) + ": ";
    if (tok.size() != 2) throw InputError(where + "expected 's t'");
    const auto s = g.names().find(tok[0]);
    const auto t = g.names().find(tok[1]);
    if (!s || !t) throw InputError(where + "unknown node label");
    out.emplace_back(*s, *t);
  }
  return out;
}

inline void write_csv(std::ostream& out, std::span<const RunRecord> rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) out << csv_row(r) << '\n';
}

}  // namespace relmax
