#pragma once

#include <random>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include "pushrank/graph.hpp"
#include "pushrank/oracle.hpp"
#include "pushrank/push.hpp"
#include "pushrank/sparse_vector.hpp"

namespace pushrank::testutil {

inline WeightedGraph graph_from_text(const std::string& text, bool weighted) {
  std::istringstream in(text);
  return WeightedGraph::from_edge_list(in, weighted);
}

// Edge lists cannot express trailing isolated nodes, so generators size the
// graph by the ids actually mentioned.
inline NodeId implied_node_count(
    const std::vector<WeightedGraph::Triple>& triples) {
  NodeId max_id = 0;
  for (const auto& [src, dst, w] : triples)
    max_id = std::max({max_id, src, dst});
  return max_id + 1;
}

// Random weighted digraph normalized to matrix l1 norm 1 (rows with smaller
// sums stay strictly substochastic, absent rows are dangling).
inline WeightedGraph random_substochastic_graph(std::mt19937_64& rng, NodeId n,
                                                double mean_degree) {
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::uniform_int_distribution<NodeId> node(0, n - 1);
  std::poisson_distribution<int> degree(mean_degree);
  std::vector<WeightedGraph::Triple> triples;
  std::set<std::pair<NodeId, NodeId>> seen;
  for (NodeId x = 0; x < n; ++x) {
    const int d = degree(rng);
    for (int i = 0; i < d; ++i) {
      const NodeId y = node(rng);
      if (seen.insert({x, y}).second) triples.emplace_back(x, y, weight(rng));
    }
  }
  if (triples.empty()) triples.emplace_back(0, n > 1 ? 1 : 0, 1.0);
  const NodeId actual = implied_node_count(triples);
  return normalize_unit_norm(WeightedGraph::from_arcs(actual, std::move(triples)))
      .graph;
}

// Natural walk of a random digraph in which roughly dangling_frac of the
// nodes have no out-arcs at all.
inline WeightedGraph random_natural_graph(std::mt19937_64& rng, NodeId n,
                                          double mean_degree,
                                          double dangling_frac) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<NodeId> node(0, n - 1);
  std::poisson_distribution<int> degree(mean_degree);
  std::vector<WeightedGraph::Triple> triples;
  std::set<std::pair<NodeId, NodeId>> seen;
  for (NodeId x = 0; x < n; ++x) {
    if (unit(rng) < dangling_frac) continue;
    const int d = std::max(1, degree(rng));
    for (int i = 0; i < d; ++i) {
      const NodeId y = node(rng);
      if (seen.insert({x, y}).second) triples.emplace_back(x, y, 1.0);
    }
  }
  if (triples.empty()) triples.emplace_back(0, n > 1 ? 1 : 0, 1.0);
  const NodeId actual = implied_node_count(triples);
  return natural_walk(WeightedGraph::from_arcs(actual, std::move(triples)));
}

inline SparseVector random_preference(std::mt19937_64& rng, NodeId n,
                                      int max_support = 5) {
  std::uniform_int_distribution<NodeId> node(0, n - 1);
  std::uniform_int_distribution<int> support_size(
      1, std::min<int>(max_support, static_cast<int>(n)));
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  std::set<NodeId> support;
  const int k = support_size(rng);
  while (static_cast<int>(support.size()) < k) support.insert(node(rng));
  std::vector<SparseVector::Entry> entries;
  double sum = 0.0;
  for (NodeId id : support) {
    entries.emplace_back(id, weight(rng));
    sum += entries.back().second;
  }
  for (auto& e : entries) e.second /= sum;
  return SparseVector::from_entries(std::move(entries));
}

inline double l1_distance_dense(const oracle::DenseVector& a,
                                const oracle::DenseVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

// || p + rank(r) - rank(v) ||_1 for a run in flight: the push invariant says
// this is identically zero.
inline double reconstruction_gap(const oracle::DenseRanker& ranker,
                                 const PushRun& run,
                                 const oracle::DenseVector& rank_v) {
  const NodeId n = ranker.size();
  const auto rank_r = ranker.rank(oracle::to_dense(run.residual(), n));
  const auto p = oracle::to_dense(run.approximation(), n);
  double gap = 0.0;
  for (NodeId i = 0; i < n; ++i)
    gap += std::abs(p[i] + rank_r[i] - rank_v[i]);
  return gap;
}

// ||oracle(v) - p||_1: the true absolute error of a finished run.
inline double true_error(const WeightedGraph& g, double alpha,
                         const SparseVector& v, const SparseVector& p) {
  const auto exact =
      oracle::dense_rank(g, oracle::to_dense(v, g.node_count()), alpha);
  return l1_distance_dense(exact, oracle::to_dense(p, g.node_count()));
}

}  // namespace pushrank::testutil
