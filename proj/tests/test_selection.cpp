#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "relmax/baselines.hpp"
#include "relmax/selection.hpp"

using namespace relmax;

namespace {

EstimatorConfig exact_cfg() {
  EstimatorConfig c;
  c.method = Method::exact;
  c.samples = 20000;
  return c;
}

std::vector<CandidateId> ids(const SelectionResult& r) {
  std::vector<CandidateId> out;
  for (const auto& c : r.chosen) out.push_back(c.id);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ReliablePath> all_paths(const UncertainGraph& g, const CandidateSet& cands, NodeId s, NodeId t,
                                    std::size_t l = 30) {
  const auto aug = augment(g, cands);
  return top_l_paths(aug.graph, s, t, l, aug.map);
}

PreparedQuery fig5_prepared(const UncertainGraph& g) {
  PipelineParams pp;
  pp.r = 3;
  pp.l = 3;
  pp.h = 3;
  pp.zeta = 0.5;
  return prepare_query(g, g.names().at("s"), g.names().at("t"), pp, exact_cfg());
}

}  // namespace

TEST(SelectExact, Fig4OptimaAndObservation3) {
  const auto f = fixture::fig4(0.5, 0.7);
  const auto one = select_exact(f.graph, f.cands, f.s, f.t, 1, exact_cfg());
  EXPECT_EQ(ids(one), (std::vector<CandidateId>{f.cand("s", "A")}));
  EXPECT_NEAR(one.new_reliability, 0.35, 1e-12);
  const auto two = select_exact(f.graph, f.cands, f.s, f.t, 2, exact_cfg());
  EXPECT_EQ(ids(two), (std::vector<CandidateId>{f.cand("s", "B"), f.cand("B", "t")}));
  EXPECT_NEAR(two.new_reliability, 0.5425, 1e-12);
  EXPECT_FALSE(std::includes(ids(two).begin(), ids(two).end(), ids(one).begin(), ids(one).end()));
}

TEST(SelectExact, MatchesSubsetOracle) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto g = oracle::random_graph(7, 8, seed % 2 == 0, seed);
    const auto cands = oracle::random_candidates(g, 6, 0.5, seed + 50);
    const auto want = oracle::best_subset(g, cands, 0, 6, 2);
    const auto got = select_exact(g, cands, 0, 6, 2, exact_cfg());
    EXPECT_NEAR(got.new_reliability, want.first, 1e-12);
  }
}

TEST(SelectExact, BudgetLargerThanCandidatesTakesAll) {
  const auto f = fixture::fig4(0.5, 0.7);
  const auto all = select_exact(f.graph, f.cands, f.s, f.t, 10, exact_cfg());
  EXPECT_EQ(all.chosen.size(), 3u);
  EXPECT_THROW(select_exact(f.graph, f.cands, f.s, f.t, 2, exact_cfg(), 2), InfeasibleError);
}

TEST(SelectExact, Observation4DirectEdgeAlwaysChosen) {
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 10; ++seed) {
    const auto g = oracle::random_graph(6, 6, true, seed);
    if (g.has_edge(0, 5)) continue;
    std::vector<ProbEdge> list{{0, 5, 0.5}};
    for (const auto& c : oracle::random_candidates(g, 5, 0.5, seed).edges) {
      if (!(c.src == 0 && c.dst == 5)) list.push_back(c.as_edge());
    }
    const auto cands = explicit_candidates(g, list);
    const auto best = select_exact(g, cands, 0, 5, 2, exact_cfg());
    const auto chosen = ids(best);
    EXPECT_TRUE(std::binary_search(chosen.begin(), chosen.end(), 0u)) << seed;
    ++checked;
  }
}

TEST(Batches, ZeroLabelFirstAndGrouped) {
  const auto f = fixture::fig4(0.5, 0.7);
  EXPECT_FALSE(build_batches(all_paths(f.graph, f.cands, f.s, f.t), f.cands).front().label.empty());
  const auto g = fixture::fig5();
  const auto cands = fixture::candidates(g, {{"s", "B", 0.5}, {"B", "t", 0.5}, {"s", "C", 0.5}});
  const auto paths = all_paths(g, cands, 0, g.names().at("t"));
  ASSERT_FALSE(paths.front().candidates.empty());
  const auto batches = build_batches(paths, cands);
  ASSERT_FALSE(batches.empty());
  EXPECT_TRUE(batches.front().label.empty());
  std::size_t total = 0;
  for (const auto& b : batches) {
    for (const auto& p : b.paths) EXPECT_EQ(p.candidates, b.label);
    total += b.paths.size();
  }
  EXPECT_EQ(total, paths.size());
}

TEST(SelectIp, Fig5PicksMostReliablePath) {
  const auto g = fixture::fig5();
  const auto prep = fig5_prepared(g);
  const NodeId s = g.names().at("s"), t = g.names().at("t");
  const auto ip = select_ip(g, prep.candidates, prep.paths, s, t, 2, exact_cfg());
  ASSERT_FALSE(ip.trace.empty());
  EXPECT_NEAR(ip.trace.front().gain, 0.25, 1e-12);
  std::vector<std::string> first;
  for (auto id : ip.trace.front().added) {
    const auto& c = prep.candidates.at(id);
    first.push_back(g.names().label(c.src) + g.names().label(c.dst));
  }
  EXPECT_EQ(first, (std::vector<std::string>{"sB", "Bt"}));
  EXPECT_LE(ip.chosen.size(), 2u);
}

TEST(SelectBe, Fig5PicksSharedBatch) {
  const auto g = fixture::fig5();
  const auto prep = fig5_prepared(g);
  const NodeId s = g.names().at("s"), t = g.names().at("t");
  const auto be = select_be(g, prep.candidates, prep.paths, s, t, 2, exact_cfg());
  std::vector<std::string> got;
  for (const auto& c : be.chosen) got.push_back(g.names().label(c.src) + g.names().label(c.dst));
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, (std::vector<std::string>{"Bt", "sC"}));
  const auto ip = select_ip(g, prep.candidates, prep.paths, s, t, 2, exact_cfg());
  EXPECT_GE(be.gain, ip.gain);
  const auto best = select_exact(g, prep.candidates, s, t, 2, exact_cfg());
  EXPECT_NEAR(be.new_reliability, best.new_reliability, 1e-12);
}

TEST(GreedyTraces, ObjectiveNonDecreasingWithExactEstimator) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto g = oracle::random_graph(9, 12, seed % 2 == 0, seed);
    const auto cands = oracle::random_candidates(g, 8, 0.5, seed + 9);
    const auto paths = all_paths(g, cands, 0, 8);
    for (const auto& res : {select_be(g, cands, paths, 0, 8, 3, exact_cfg()),
                            select_ip(g, cands, paths, 0, 8, 3, exact_cfg())}) {
      EXPECT_LE(res.chosen.size(), 3u);
      EXPECT_GE(res.gain, -1e-12);
      double prev = res.base_reliability;
      for (const auto& r : res.trace) {
        if (r.note == "fill") continue;
        EXPECT_GE(r.gain, -1e-12) << seed;
        EXPECT_GE(r.objective, prev - 1e-12) << seed;
        prev = r.objective;
      }
    }
  }
}

TEST(SelectBe, HandlesNoPaths) {
  const auto g = fixture::build(true, {"s", "a", "t"}, {});
  CandidateSet none;
  const auto res = select_be(g, none, {}, 0, 2, 2, exact_cfg());
  EXPECT_TRUE(res.chosen.empty());
  EXPECT_EQ(res.gain, 0.0);
  EXPECT_THROW(select_be(g, none, {}, 0, 2, 0, exact_cfg()), InputError);
}

TEST(Aggregate, Values) {
  const double v[] = {0.2, 0.5, 0.8};
  EXPECT_NEAR(aggregate(v, Aggregate::avg), 0.5, 1e-15);
  EXPECT_EQ(aggregate(v, Aggregate::min), 0.2);
  EXPECT_EQ(aggregate(v, Aggregate::max), 0.8);
  EXPECT_EQ(parse_aggregate("min"), Aggregate::min);
  EXPECT_THROW(parse_aggregate("median"), InputError);
}
