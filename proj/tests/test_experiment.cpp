#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "relmax/experiment.hpp"
#include "relmax/generators.hpp"

using namespace relmax;

namespace {

const std::string kCli = RELMAX_CLI;
const std::string kSamples = RELMAX_SAMPLES;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const std::string& out = "/dev/null") {
  const int status = std::system((kCli + " " + args + " > " + out + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string tmp(const std::string& name) { return testing::TempDir() + name; }

LoadedInput generated(std::uint64_t seed) {
  GenSpec spec;
  spec.n = 80;
  spec.param = 0.06;
  spec.seed = seed;
  LoadedInput in;
  in.graph = generate(spec);
  return in;
}

}  // namespace

TEST(RunQuery, Fig4AllMethods) {
  RunConfig c;
  c.graph = kSamples + "/fig4.txt";
  c.candidates = kSamples + "/fig4_candidates.txt";
  c.k = 2;
  c.estimator = Method::exact;
  const auto in = load_input(c);
  const NodeId s = in.graph.names().at("s"), t = in.graph.names().at("t");
  const std::map<std::string, double> want{{"exact", 0.5425}, {"topk", 0.4025}, {"hc", 0.4725},
                                           {"mrp", 0.5425}, {"ip", 0.5425}};
  for (const auto& m : known_methods()) {
    const auto rec = run_query(in, c, m, s, t, 1);
    EXPECT_LE(rec.chosen.size(), 2u) << m;
    EXPECT_GE(rec.gain, 0.0) << m;
    if (auto it = want.find(m); it != want.end()) {
      EXPECT_NEAR(rec.new_rel, it->second, 1e-12) << m;
    }
    EXPECT_FALSE(rec.trace.empty()) << m;
  }
  EXPECT_THROW(run_query(in, c, "nope", s, t, 1), InputError);
}

TEST(RunExperiment, DeterministicAcrossWorkers) {
  const auto in = generated(3);
  RunConfig c;
  c.methods = {"be", "ip", "hc"};
  c.k = 3;
  c.r = 15;
  c.l = 10;
  c.samples = 200;
  c.estimator = Method::rss;
  c.timing = false;
  const std::vector<QueryPair> queries{{0, 79}, {1, 70}, {2, 60}, {5, 50}};
  Sweep sweep;
  sweep.k = {2, 3};
  std::string first;
  for (unsigned w : {1u, 4u, 1u, 4u}) {
    c.workers = w;
    std::ostringstream os;
    write_csv(os, run_experiment(in, c, sweep, queries));
    if (first.empty()) first = os.str();
    EXPECT_EQ(os.str(), first) << "workers " << w;
  }
  EXPECT_EQ(first.substr(0, first.find('\n')), kCsvHeader);
}

TEST(Validate, RejectsBadConfig) {
  RunConfig c;
  c.k = 0;
  EXPECT_THROW(validate(c), InputError);
  c.k = 1;
  c.zeta = 1.5;
  EXPECT_THROW(validate(c), InputError);
  c.zeta = 0.5;
  c.methods = {"bogus"};
  EXPECT_THROW(validate(c), InputError);
}

TEST(Cli, ImproveWritesCsvAndTrace) {
  const auto csv = tmp("fig4.csv"), trace = tmp("fig4.trace");
  ASSERT_EQ(run_cli("improve --graph " + kSamples + "/fig4.txt --candidates " + kSamples +
                    "/fig4_candidates.txt --source s --target t --k 2 --method exact,hc,be --estimator exact "
                    "--no-timing --trace " + trace + " --output " + csv),
            0);
  const auto text = slurp(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  EXPECT_NE(text.find("exact,2,0.5,100,30,3,0,0.54"), std::string::npos) << text;
  const auto lines = slurp(trace);
  EXPECT_NE(lines.find("method=hc"), std::string::npos);
  EXPECT_NE(lines.find("gain="), std::string::npos);
  std::size_t hc_rounds = 0;
  for (std::size_t p = lines.find("method=hc"); p != std::string::npos; p = lines.find("method=hc", p + 1)) ++hc_rounds;
  EXPECT_EQ(hc_rounds, 2u);
}

TEST(Cli, ByteIdenticalReruns) {
  const std::string args = "bench --graph " + kSamples + "/fig5.txt --queries " + kSamples +
                           "/fig5_queries.txt --method be,ip --k 1,2 --r 3 --l 3 --samples 300 --no-timing";
  for (unsigned w : {1u, 4u}) {
    const auto a = tmp("a.csv"), b = tmp("b.csv");
    ASSERT_EQ(run_cli(args + " --workers " + std::to_string(w), a), 0);
    ASSERT_EQ(run_cli(args + " --workers " + std::to_string(w), b), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_FALSE(slurp(a).empty());
  }
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("improve --bogus-flag"), 2);
  EXPECT_EQ(run_cli("improve --graph /no/such/file --source s --target t"), 2);
  EXPECT_EQ(run_cli("improve --graph " + kSamples + "/fig4.txt --source s --target nobody"), 2);
  EXPECT_EQ(run_cli("improve --graph " + kSamples + "/fig4.txt --source s --target t --zeta 2"), 2);
  EXPECT_EQ(run_cli("estimate --graph " + kSamples + "/fig4.txt --source A --target t --method exact"), 0);
  const auto bad = tmp("selfloop.txt");
  std::ofstream(bad) << "a a 0.5\n";
  EXPECT_EQ(run_cli("estimate --graph " + bad + " --source a --target a"), 2);
}

TEST(Cli, InfeasibleExactExitsThree) {
  const auto big = tmp("big.txt");
  ASSERT_EQ(run_cli("generate --family er --n 40 --param 0.3 --seed 2", big), 0);
  EXPECT_EQ(run_cli("estimate --graph " + big + " --source 0 --target 39 --method exact"), 3);
}

TEST(Cli, GenerateRoundTrip) {
  const auto a = tmp("gen_a.txt"), b = tmp("gen_b.txt");
  ASSERT_EQ(run_cli("generate --family ba --n 100 --seed 5", a), 0);
  ASSERT_EQ(run_cli("generate --family ba --n 100 --seed 5", b), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const auto g = load_graph(a);
  EXPECT_EQ(g.node_count(), 100u);
  EXPECT_EQ(to_edge_list(g), slurp(a));
}

TEST(Cli, MultiAggregates) {
  const auto out = tmp("multi.csv");
  for (const std::string agg : {"avg", "min", "max"}) {
    ASSERT_EQ(run_cli("multi --graph " + kSamples + "/fig5.txt --sources s,A --targets t --k 2 --r 3 --l 3 "
                      "--no-timing --aggregate " + agg,
                      out),
              0);
    EXPECT_NE(slurp(out).find("be-" + agg), std::string::npos);
  }
}
