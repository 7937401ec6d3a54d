#include <sys/resource.h>

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relmax/relmax.hpp"

using namespace relmax;

namespace {

struct Outputs {
  std::unique_ptr<std::ofstream> file;
  std::ostream* out = &std::cout;

  explicit Outputs(const std::string& path) {
    if (path.empty()) return;
    file = std::make_unique<std::ofstream>(path);
    if (!*file) throw InputError("cannot write '" + path + "'");
    out = file.get();
  }
};

void write_trace(const std::string& path, const std::vector<RunRecord>& rows) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  for (const auto& r : rows) {
    for (const auto& line : r.trace) out << line << '\n';
  }
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

long peak_rss_kb() {
  rusage ru{};
  if (getrusage(RUSAGE_SELF, &ru) != 0) return -1;
  return ru.ru_maxrss;
}

// Options shared by improve, multi and bench.
void add_run_options(CLI::App* cmd, RunConfig& c, std::string& estimator) {
  cmd->add_option("--graph", c.graph, "edge-list file")->required();
  cmd->add_flag_callback("--undirected", [&c] { c.directed = false; }, "treat the graph as undirected");
  cmd->add_option("--zeta", c.zeta, "probability of inserted edges")->capture_default_str();
  cmd->add_option("--r", c.r, "top-r reliable nodes kept per terminal")->capture_default_str();
  cmd->add_option("--l", c.l, "number of most reliable paths")->capture_default_str();
  cmd->add_option("--h", c.h, "hop limit for candidate edges")->capture_default_str();
  cmd->add_option("--samples", c.samples, "samples per estimate")->capture_default_str();
  cmd->add_flag("--auto-samples", c.auto_samples, "pick the sample size by index of dispersion");
  cmd->add_option("--seed", c.seed, "master seed")->capture_default_str();
  cmd->add_option("--estimator", estimator, "auto, exact, mc or rss")->capture_default_str();
  cmd->add_option("--prob-overrides", c.prob_overrides, "per-candidate probabilities (src dst prob)");
  cmd->add_option("--candidates", c.candidates, "explicit candidate list (src dst prob)");
  cmd->add_option("--output", c.output, "CSV output file (default stdout)");
  cmd->add_option("--trace", c.trace, "per-round trace file");
  cmd->add_option("--workers", c.workers, "worker threads for independent queries")->capture_default_str();
  cmd->add_flag_callback("--no-timing", [&c] { c.timing = false; }, "report time_ms as 0 for reproducible output");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    if (comma > start) out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::vector<QueryPair> random_queries(const UncertainGraph& g, std::size_t count, std::uint64_t seed) {
  if (g.node_count() < 2) throw InputError("graph needs at least two nodes for random queries");
  rng::SplitMix64 gen(rng::derive(seed, 0x5155));
  std::vector<QueryPair> out;
  while (out.size() < count) {
    const auto s = static_cast<NodeId>(gen.below(g.node_count()));
    const auto t = static_cast<NodeId>(gen.below(g.node_count()));
    if (s != t) out.emplace_back(s, t);
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Reliability estimation and budgeted edge addition on uncertain graphs"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  // estimate ----------------------------------------------------------------
  RunConfig ec;
  std::string e_source, e_target, e_method = "auto";
  bool all_from = false, all_to = false;
  auto* est = app.add_subcommand("estimate", "estimate s-t reliability");
  est->add_option("--graph", ec.graph, "edge-list file")->required();
  est->add_flag_callback("--undirected", [&ec] { ec.directed = false; }, "treat the graph as undirected");
  est->add_option("--source", e_source, "source label")->required();
  est->add_option("--target", e_target, "target label");
  est->add_option("--method", e_method, "auto, exact, mc or rss")->capture_default_str();
  est->add_option("--samples", ec.samples, "samples")->capture_default_str();
  est->add_flag("--auto-samples", ec.auto_samples, "pick the sample size by index of dispersion");
  est->add_option("--seed", ec.seed, "seed")->capture_default_str();
  est->add_option("--workers", ec.workers, "sampling threads (mc)")->capture_default_str();
  est->add_flag("--all-from", all_from, "reliability from source to every node");
  est->add_flag("--all-to", all_to, "reliability from every node to the source");
  est->add_option("--output", ec.output, "output file (default stdout)");

  // improve -----------------------------------------------------------------
  RunConfig ic;
  std::string i_est = "auto", i_methods = "be", i_source, i_target, i_queries;
  auto* imp = app.add_subcommand("improve", "select k edges for s-t queries");
  add_run_options(imp, ic, i_est);
  imp->add_option("--method", i_methods, "comma list of: exact,topk,hc,cent-deg,cent-bet,eigen,mrp,ip,be")
      ->capture_default_str();
  imp->add_option("--k", ic.k, "edge budget")->capture_default_str();
  imp->add_option("--source", i_source, "source label");
  imp->add_option("--target", i_target, "target label");
  imp->add_option("--queries", i_queries, "file of 's t' lines");

  // multi -------------------------------------------------------------------
  RunConfig mc;
  std::string m_est = "auto", m_agg = "avg", m_queries, m_sources, m_targets;
  auto* mul = app.add_subcommand("multi", "select k edges for a source set and a target set");
  add_run_options(mul, mc, m_est);
  mul->add_option("--k", mc.k, "edge budget")->capture_default_str();
  mul->add_option("--aggregate", m_agg, "avg, min or max")->capture_default_str();
  mul->add_option("--k1-ratio", mc.k1_ratio, "installment size as a fraction of k")->capture_default_str();
  mul->add_option("--queries", m_queries, "file of 'S: a,b | T: x,y' lines");
  mul->add_option("--sources", m_sources, "comma list of source labels");
  mul->add_option("--targets", m_targets, "comma list of target labels");

  // generate ----------------------------------------------------------------
  GenSpec gs;
  std::string g_family = "erdos_renyi", g_model = "uniform", g_output;
  auto* gen = app.add_subcommand("generate", "write a synthetic uncertain graph");
  gen->add_option("--family", g_family, "erdos_renyi, k_regular, small_world or scale_free")->capture_default_str();
  gen->add_option("--n", gs.n, "node count")->capture_default_str();
  gen->add_option("--param", gs.param, "edge prob, degree, rewiring prob or attachment count")->capture_default_str();
  gen->add_option("--edges", gs.edges, "exact edge count (erdos_renyi)");
  gen->add_option("--degree", gs.degree, "lattice degree (small_world)")->capture_default_str();
  gen->add_flag("--directed", gs.directed, "directed output (erdos_renyi)");
  gen->add_option("--prob-model", g_model, "uniform or exponential")->capture_default_str();
  gen->add_option("--lo", gs.prob.lo, "uniform lower bound (exclusive)")->capture_default_str();
  gen->add_option("--hi", gs.prob.hi, "uniform upper bound")->capture_default_str();
  gen->add_option("--mu", gs.prob.mu, "exponential mean")->capture_default_str();
  gen->add_option("--max-count", gs.prob.max_count, "largest interaction count")->capture_default_str();
  gen->add_option("--seed", gs.seed, "seed")->capture_default_str();
  gen->add_option("--output", g_output, "output file (default stdout)");

  // bench -------------------------------------------------------------------
  RunConfig bc;
  std::string b_est = "auto", b_methods = "be", b_queries;
  std::size_t b_random = 0;
  Sweep sweep;
  auto* bench = app.add_subcommand("bench", "parameter sweep averaged over queries");
  add_run_options(bench, bc, b_est);
  bench->add_option("--method", b_methods, "comma list of methods")->capture_default_str();
  bench->add_option("--k", sweep.k, "edge budgets")->delimiter(',');
  bench->add_option("--zetas", sweep.zeta, "zeta values")->delimiter(',');
  bench->add_option("--rs", sweep.r, "r values")->delimiter(',');
  bench->add_option("--ls", sweep.l, "l values")->delimiter(',');
  bench->add_option("--hs", sweep.h, "h values")->delimiter(',');
  bench->add_option("--queries", b_queries, "file of 's t' lines");
  bench->add_option("--random-queries", b_random, "draw this many random queries instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (est->parsed()) {
    auto in = load_input(ec);
    print_warnings(in.warnings);
    const auto& g = in.graph;
    const NodeId s = g.names().at(e_source);
    Outputs o(ec.output);
    if (all_from || all_to) {
      const auto method = e_method == "mc" ? Method::mc : Method::rss;
      EstimatorConfig cfg;
      cfg.workers = ec.workers;
      const auto rel = all_from ? reliability_all_from(g, s, ec.samples, ec.seed, method, cfg)
                                : reliability_all_to(g, s, ec.samples, ec.seed, method, cfg);
      *o.out << "node,reliability\n";
      for (NodeId v = 0; v < g.node_count(); ++v) *o.out << g.names().label(v) << ',' << detail::format_double(rel[v]) << '\n';
      return 0;
    }
    if (e_target.empty()) throw InputError("--target is required");
    const NodeId t = g.names().at(e_target);
    EstimatorConfig cfg;
    cfg.method = parse_method(e_method);
    cfg.samples = ec.samples;
    cfg.seed = ec.seed;
    cfg.workers = ec.workers;
    if (ec.auto_samples) {
      const QueryPair q[] = {{s, t}};
      const auto choice = converged_sample_size(g, q, {100, 250, 500, 1000, 2500, 5000, 10000}, 30, 1e-3, cfg);
      if (!choice.converged) std::cerr << "warning: no grid sample size converged; using the largest\n";
      cfg.samples = choice.samples;
    }
    const auto r = estimate(g, s, t, cfg);
    *o.out << "value,variance,samples,method\n"
           << detail::format_double(r.value) << ',' << detail::format_double(r.variance) << ',' << r.samples_used
           << ',' << to_string(r.method) << '\n';
    return 0;
  }

  if (imp->parsed()) {
    ic.estimator = parse_method(i_est);
    ic.methods = split_list(i_methods);
    validate(ic);
    auto in = load_input(ic);
    print_warnings(in.warnings);
    std::vector<QueryPair> queries;
    if (!i_queries.empty()) {
      queries = load_queries(i_queries, in.graph);
    } else {
      if (i_source.empty() || i_target.empty()) throw InputError("give --source and --target, or --queries");
      queries.emplace_back(in.graph.names().at(i_source), in.graph.names().at(i_target));
    }
    if (queries.empty()) throw InputError("no queries");
    std::vector<RunRecord> rows;
    for (const auto& method : ic.methods) {
      auto recs = fan_out(queries.size(), ic.workers, [&](std::size_t i) {
        return run_query(in, ic, method, queries[i].first, queries[i].second, ic.seed ^ i);
      });
      for (auto& r : recs) rows.push_back(std::move(r));
    }
    Outputs o(ic.output);
    write_csv(*o.out, rows);
    write_trace(ic.trace, rows);
    return 0;
  }

  if (mul->parsed()) {
    mc.estimator = parse_method(m_est);
    mc.aggregate = parse_aggregate(m_agg);
    validate(mc);
    auto in = load_input(mc);
    print_warnings(in.warnings);
    std::vector<MultiQuery> queries;
    if (!m_queries.empty()) {
      queries = load_multi_queries(m_queries, in.graph.names());
    } else {
      if (m_sources.empty() || m_targets.empty()) throw InputError("give --sources and --targets, or --queries");
      queries.push_back(parse_multi_query("S: " + m_sources + " | T: " + m_targets, in.graph.names()));
    }
    if (queries.empty()) throw InputError("no queries");
    auto rows = fan_out(queries.size(), mc.workers,
                        [&](std::size_t i) { return run_multi_query(in, mc, queries[i], mc.seed ^ i); });
    Outputs o(mc.output);
    write_csv(*o.out, rows);
    write_trace(mc.trace, rows);
    return 0;
  }

  if (gen->parsed()) {
    gs.family = parse_family(g_family);
    if (g_model == "uniform") gs.prob.kind = ProbModel::Kind::uniform;
    else if (g_model == "exponential") gs.prob.kind = ProbModel::Kind::exponential_count;
    else throw InputError("unknown probability model '" + g_model + "'");
    if (gs.family == Family::small_world && gen->count("--param") == 0) gs.param = 0.3;
    const auto g = generate(gs);
    Outputs o(g_output);
    write_graph(*o.out, g);
    return 0;
  }

  if (bench->parsed()) {
    bc.estimator = parse_method(b_est);
    bc.methods = split_list(b_methods);
    auto in = load_input(bc);
    print_warnings(in.warnings);
    std::vector<QueryPair> queries;
    if (!b_queries.empty()) queries = load_queries(b_queries, in.graph);
    else if (b_random > 0) queries = random_queries(in.graph, b_random, bc.seed);
    else throw InputError("give --queries or --random-queries");
    const auto rows = run_experiment(in, bc, sweep, queries);
    Outputs o(bc.output);
    write_csv(*o.out, rows);
    write_trace(bc.trace, rows);
    if (const long kb = peak_rss_kb(); kb >= 0) std::cerr << "peak_rss_kb=" << kb << '\n';
    else std::cerr << "peak_rss_kb=unavailable\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
