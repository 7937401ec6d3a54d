#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "relmax/relmax.hpp"

namespace oracle {

// Random graph containing a Hamiltonian cycle, so its adjacency matrix is irreducible.
inline relmax::UncertainGraph strongly_connected(unsigned n, std::size_t extra, bool directed, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> prob(0.1, 0.9);
  std::uniform_int_distribution<unsigned> node(0, n - 1);
  std::vector<relmax::ProbEdge> edges;
  std::set<std::pair<unsigned, unsigned>> used;
  auto add = [&](unsigned a, unsigned b) {
    auto key = directed ? std::make_pair(a, b) : std::make_pair(std::min(a, b), std::max(a, b));
    if (a == b || !used.insert(key).second) return;
    edges.push_back({a, b, prob(gen)});
  };
  for (unsigned i = 0; i < n; ++i) add(i, (i + 1) % n);
  for (std::size_t i = 0; i < 10 * extra && edges.size() < n + extra; ++i) add(node(gen), node(gen));
  return relmax::UncertainGraph(relmax::NodeTable::numbered(n), directed, std::move(edges));
}

inline Eigen::MatrixXd dense_adjacency(const relmax::UncertainGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    a(e.src, e.dst) = e.prob;
    if (!g.directed()) a(e.dst, e.src) = e.prob;
  }
  return a;
}

// Eigenvalue with the largest real part and its positive unit eigenvector.
inline std::pair<double, Eigen::VectorXd> perron(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < a.rows(); ++i) {
    if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
  }
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  if (v.sum() < 0) v = -v;
  return {es.eigenvalues()(best).real(), v.normalized()};
}

// Reference eigen-score pick: candidates (i, j) with i among the top-(k+d_in)
// nodes by the left vector and j among the top-(k+d_out) by the right vector,
// ranked by u(i)v(j); returns the k best ids, sorted.
inline std::vector<relmax::CandidateId> eigen_pick(const relmax::UncertainGraph& g, const relmax::CandidateSet& cands,
                                                   std::size_t k) {
  const auto a = dense_adjacency(g);
  const auto v = perron(a).second;
  const auto u = perron(a.transpose()).second;
  const std::size_t n = g.node_count();
  std::size_t d_in = 0, d_out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t in = 0, out = 0;
    for (std::size_t j = 0; j < n; ++j) {
      in += a(j, i) != 0.0;
      out += a(i, j) != 0.0;
    }
    d_in = std::max(d_in, in);
    d_out = std::max(d_out, out);
  }
  auto top = [&](const Eigen::VectorXd& s, std::size_t count) {
    std::vector<unsigned> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](unsigned x, unsigned y) { return s(x) > s(y); });
    order.resize(std::min(count, n));
    return std::set<unsigned>(order.begin(), order.end());
  };
  const auto in_i = top(u, k + d_in);
  const auto in_j = top(v, k + d_out);
  std::vector<std::pair<double, relmax::CandidateId>> ranked;
  for (const auto& c : cands.edges) {
    double best = -1.0;
    if (in_i.count(c.src) && in_j.count(c.dst)) best = u(c.src) * v(c.dst);
    if (!g.directed() && in_i.count(c.dst) && in_j.count(c.src)) best = std::max(best, u(c.dst) * v(c.src));
    if (best >= 0.0) ranked.emplace_back(best, c.id);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<relmax::CandidateId> out;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) out.push_back(ranked[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
