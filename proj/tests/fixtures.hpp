#pragma once

#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "relmax/relmax.hpp"

namespace fixture {

using relmax::CandidateSet;
using relmax::NodeTable;
using relmax::ProbEdge;
using relmax::UncertainGraph;

struct Instance {
  UncertainGraph graph;
  CandidateSet cands;
  relmax::NodeId s, t;
  relmax::NodeId id(const std::string& label) const { return graph.names().at(label); }
  relmax::CandidateId cand(const std::string& a, const std::string& b) const {
    for (const auto& c : cands.edges) {
      if (c.src == id(a) && c.dst == id(b)) return c.id;
    }
    throw std::runtime_error("no candidate " + a + b);
  }
};

inline UncertainGraph build(bool directed, const std::vector<std::string>& nodes,
                            const std::vector<std::tuple<std::string, std::string, double>>& edges) {
  NodeTable names;
  for (const auto& v : nodes) names.intern(v);
  std::vector<ProbEdge> list;
  for (const auto& [a, b, p] : edges) list.push_back({names.intern(a), names.intern(b), p});
  return UncertainGraph(std::move(names), directed, std::move(list));
}

inline CandidateSet candidates(const UncertainGraph& g,
                               const std::vector<std::tuple<std::string, std::string, double>>& list) {
  std::vector<ProbEdge> edges;
  for (const auto& [a, b, p] : list) edges.push_back({g.names().at(a), g.names().at(b), p});
  return relmax::explicit_candidates(g, edges);
}

// Example 1: A and B linked both ways, A -> t; s starts isolated.
// Candidates sA, sB, Bt (ids 0, 1, 2) at zeta.
inline Instance fig4(double alpha, double zeta) {
  auto g = build(true, {"s", "A", "B", "t"}, {{"A", "B", alpha}, {"B", "A", alpha}, {"A", "t", alpha}});
  auto c = candidates(g, {{"s", "A", zeta}, {"s", "B", zeta}, {"B", "t", zeta}});
  return {g, c, 0, 3};
}

// Three nodes, no edges; candidates st, sA, At (ids 0, 1, 2) at 0.5.
inline Instance counterexample() {
  auto g = build(true, {"s", "A", "t"}, {});
  auto c = candidates(g, {{"s", "t", 0.5}, {"s", "A", 0.5}, {"A", "t", 0.5}});
  return {g, c, 0, 2};
}

// Elimination / batch example: with r = 3, C(s) = {s,A,B}, C(t) = {B,C,t}.
inline UncertainGraph fig5() {
  return build(true, {"s", "A", "B", "C", "D", "E", "F", "G", "t"},
               {{"s", "A", 0.28},
                {"A", "B", 0.9},
                {"B", "F", 0.9},
                {"F", "t", 0.3},
                {"B", "G", 0.9},
                {"G", "t", 0.3},
                {"C", "B", 0.9},
                {"C", "t", 0.3},
                {"A", "D", 0.3},
                {"D", "E", 0.5}});
}

}  // namespace fixture
