#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "eigen_oracle.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "relmax/baselines.hpp"

using namespace relmax;

namespace {

EstimatorConfig exact_cfg() {
  EstimatorConfig c;
  c.method = Method::exact;
  return c;
}

}  // namespace

TEST(Eigen, MatchesDenseSolver) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const bool directed = seed % 2 == 0;
    const auto g = oracle::strongly_connected(4 + seed % 7, 6, directed, seed);
    const auto a = oracle::dense_adjacency(g);
    const auto [lambda, right] = oracle::perron(a);
    const auto [lambda_t, left] = oracle::perron(a.transpose());
    const auto es = eigen_scores(g);
    EXPECT_NEAR(es.lambda, lambda, 1e-6) << seed;
    EXPECT_NEAR(lambda_t, lambda, 1e-9);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      EXPECT_NEAR(es.v[i], right(i), 1e-6);
      EXPECT_NEAR(es.u[i], left(i), 1e-6);
    }
    const auto cands = all_missing_candidates(g, 0.5, 0);
    std::vector<CandidateId> got;
    for (const auto& c : select_eigen(g, cands, 0, 1, 3, exact_cfg()).chosen) got.push_back(c.id);
    EXPECT_EQ(got, oracle::eigen_pick(g, cands, 3)) << seed;
  }
}

TEST(Eigen, SelectionInvariantToScaling) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = oracle::strongly_connected(8, 6, seed % 2 == 0, seed);
    auto edges = g.edges();
    for (auto& e : edges) e.prob *= 0.5;
    const UncertainGraph h(NodeTable::numbered(8), g.directed(), edges);
    const auto cg = all_missing_candidates(g, 0.5, 0);
    const auto ch = all_missing_candidates(h, 0.5, 0);
    const auto a = select_eigen(g, cg, 0, 7, 3, exact_cfg());
    const auto b = select_eigen(h, ch, 0, 7, 3, exact_cfg());
    ASSERT_EQ(a.chosen.size(), b.chosen.size());
    for (std::size_t i = 0; i < a.chosen.size(); ++i) EXPECT_EQ(a.chosen[i].id, b.chosen[i].id);
  }
}

TEST(Centrality, BetweennessOnPaths) {
  const auto d = fixture::build(true, {"a", "b", "c"}, {{"a", "b", 0.5}, {"b", "c", 0.5}});
  EXPECT_EQ(betweenness_centrality(d), (std::vector<double>{0, 1, 0}));
  const auto u = fixture::build(false, {"a", "b", "c", "d"}, {{"a", "b", 0.5}, {"b", "c", 0.5}, {"c", "d", 0.5}});
  EXPECT_EQ(betweenness_centrality(u), (std::vector<double>{0, 2, 2, 0}));
  const auto deg = degree_centrality(u);
  EXPECT_DOUBLE_EQ(deg[1], 1.0);
  EXPECT_DOUBLE_EQ(deg[0], 0.5);
}

TEST(Baselines, RespectBudgetAndCandidates) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = oracle::strongly_connected(8, 5, seed % 2 == 0, seed);
    const auto cands = oracle::random_candidates(g, 7, 0.5, seed);
    const std::size_t k = 1 + seed % 3;
    for (const auto& res : {select_individual_topk(g, cands, 0, 7, k, exact_cfg()),
                            select_hill_climbing(g, cands, 0, 7, k, exact_cfg()),
                            select_centrality(g, cands, 0, 7, k, Centrality::degree, exact_cfg()),
                            select_centrality(g, cands, 0, 7, k, Centrality::betweenness, exact_cfg()),
                            select_eigen(g, cands, 0, 7, k, exact_cfg())}) {
      EXPECT_LE(res.chosen.size(), k);
      for (const auto& c : res.chosen) EXPECT_TRUE(cands.contains(c.id));
    }
  }
}

TEST(HillClimbing, CounterexampleTrace) {
  const auto in = fixture::counterexample();
  const auto hc = select_hill_climbing(in.graph, in.cands, in.s, in.t, 3, exact_cfg());
  ASSERT_EQ(hc.trace.size(), 3u);
  const auto st = in.cand("s", "t"), sa = in.cand("s", "A"), at = in.cand("A", "t");
  EXPECT_EQ(hc.trace[0].added, (std::vector<CandidateId>{st}));
  auto gain_of = [](const TraceRound& r, CandidateId id) {
    for (const auto& e : r.evaluations) {
      if (e.label == std::vector<CandidateId>{id}) return e.gain;
    }
    return -1.0;
  };
  EXPECT_EQ(gain_of(hc.trace[1], at), 0.0);
  EXPECT_EQ(hc.trace[1].added, (std::vector<CandidateId>{sa}));
  EXPECT_DOUBLE_EQ(gain_of(hc.trace[2], at), 0.125);
  EXPECT_DOUBLE_EQ(hc.new_reliability, 0.625);
}

TEST(HillClimbing, MonotoneAndAtLeastTopK) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = oracle::random_graph(7, 8, seed % 2 == 0, seed);
    const auto cands = oracle::random_candidates(g, 6, 0.5, seed + 3);
    const auto hc = select_hill_climbing(g, cands, 0, 6, 3, exact_cfg());
    const auto top = select_individual_topk(g, cands, 0, 6, 3, exact_cfg());
    double prev = hc.base_reliability;
    for (const auto& r : hc.trace) {
      EXPECT_GE(r.objective, prev - 1e-12);
      prev = r.objective;
    }
    EXPECT_GE(hc.gain, top.gain - 1e-12) << seed;
  }
}
