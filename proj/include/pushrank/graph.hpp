#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "pushrank/format.hpp"
#include "pushrank/types.hpp"

namespace pushrank {

struct Arc {
  NodeId target;
  double weight;  // m_xy > 0

  friend bool operator==(const Arc&, const Arc&) = default;
};

struct EdgeListError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class WeightedGraph;
struct NormalizedGraph;
WeightedGraph natural_walk(const WeightedGraph& g);
NormalizedGraph normalize_unit_norm(const WeightedGraph& g);

/// Immutable sparse row-major nonnegative matrix, viewed as an arc-weighted
/// digraph. Arcs are stored in compressed row form, sorted by target id
/// within each row, so iteration (and every push trace built on it) is
/// deterministic. Row l1 norms are cached at construction. A node whose row
/// is empty is dangling.
class WeightedGraph {
 public:
  // (src, dst, weight) triple used during construction.
  using Triple = std::tuple<NodeId, NodeId, double>;

  WeightedGraph() : offsets_(1, 0) {}

  // Builds a graph over nodes [0, n). Zero-weight arcs are dropped, negative
  // weights and duplicate (src, dst) pairs are rejected.
  static WeightedGraph from_arcs(NodeId n, std::vector<Triple> triples) {
    std::sort(triples.begin(), triples.end(),
              [](const Triple& a, const Triple& b) {
                return std::tie(std::get<0>(a), std::get<1>(a)) <
                       std::tie(std::get<0>(b), std::get<1>(b));
              });
    WeightedGraph g;
    g.n_ = n;
    g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    g.arcs_.reserve(triples.size());
    const Triple* prev = nullptr;
    for (const auto& t : triples) {
      auto [src, dst, w] = t;
      if (src >= n || dst >= n) throw EdgeListError("arc endpoint out of range");
      if (w < 0.0)
        throw EdgeListError("negative weight on arc " + std::to_string(src) +
                            " -> " + std::to_string(dst));
      if (prev && std::get<0>(*prev) == src && std::get<1>(*prev) == dst)
        throw EdgeListError("duplicate arc " + std::to_string(src) + " -> " +
                            std::to_string(dst));
      prev = &t;
      if (w == 0.0) continue;  // not stored
      g.offsets_[src + 1]++;
      g.arcs_.push_back({dst, w});
    }
    for (NodeId x = 0; x < n; ++x) g.offsets_[x + 1] += g.offsets_[x];
    g.recompute_row_sums();
    return g;
  }

  // Parses "src dst" (weighted == false) or "src dst weight" lines. Lines
  // starting with '#' and blank lines are skipped; LF and CRLF both work.
  // Unweighted arcs get placeholder weight 1. n = 1 + max id mentioned.
  static WeightedGraph from_edge_list(std::istream& in, bool weighted) {
    std::vector<Triple> triples;
    NodeId max_id = 0;
    bool any = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string_view sv(line);
      auto fields = detail::split_ws(sv);
      if (fields.empty() || fields[0].front() == '#') continue;
      const std::size_t expected = weighted ? 3 : 2;
      if (fields.size() != expected)
        throw EdgeListError("line " + std::to_string(lineno) + ": expected " +
                            std::to_string(expected) + " fields, got " +
                            std::to_string(fields.size()));
      auto src = parse_unsigned(fields[0]);
      auto dst = parse_unsigned(fields[1]);
      if (!src || !dst || *src >= std::numeric_limits<NodeId>::max() ||
          *dst >= std::numeric_limits<NodeId>::max())
        throw EdgeListError("line " + std::to_string(lineno) +
                            ": malformed node id");
      double w = 1.0;
      if (weighted) {
        auto parsed = parse_double(fields[2]);
        if (!parsed)
          throw EdgeListError("line " + std::to_string(lineno) +
                              ": malformed weight");
        if (*parsed < 0.0)
          throw EdgeListError("line " + std::to_string(lineno) +
                              ": negative weight");
        w = *parsed;
      }
      triples.emplace_back(static_cast<NodeId>(*src),
                           static_cast<NodeId>(*dst), w);
      max_id = std::max({max_id, static_cast<NodeId>(*src),
                         static_cast<NodeId>(*dst)});
      any = true;
    }
    return from_arcs(any ? max_id + 1 : 0, std::move(triples));
  }

  NodeId node_count() const { return n_; }
  std::size_t arc_count() const { return arcs_.size(); }

  std::span<const Arc> out_arcs(NodeId x) const {
    assert(x < n_);
    return {arcs_.data() + offsets_[x], offsets_[x + 1] - offsets_[x]};
  }

  NodeId out_degree(NodeId x) const {
    assert(x < n_);
    return static_cast<NodeId>(offsets_[x + 1] - offsets_[x]);
  }

  bool is_dangling(NodeId x) const { return out_degree(x) == 0; }

  double row_sum(NodeId x) const {
    assert(x < n_);
    return row_sums_[x];
  }

  double max_row_sum() const {
    double m = 0.0;
    for (double s : row_sums_) m = std::max(m, s);
    return m;
  }

  bool is_substochastic(double tol = kNormTolerance) const {
    for (double s : row_sums_)
      if (s > 1.0 + tol) return false;
    return true;
  }

  // Canonical edge-list form: "src dst weight" per arc, ascending (src, dst),
  // weights in shortest round-trip decimal form.
  void serialize(std::ostream& out) const {
    for (NodeId x = 0; x < n_; ++x)
      for (const Arc& a : out_arcs(x))
        out << x << ' ' << a.target << ' ' << format_double(a.weight) << '\n';
  }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    return a.n_ == b.n_ && a.offsets_ == b.offsets_ && a.arcs_ == b.arcs_;
  }

 private:
  void recompute_row_sums() {
    row_sums_.assign(n_, 0.0);
    for (NodeId x = 0; x < n_; ++x) {
      double s = 0.0;
      for (const Arc& a : out_arcs(x)) s += a.weight;
      row_sums_[x] = s;
    }
  }

  friend WeightedGraph natural_walk(const WeightedGraph&);
  friend NormalizedGraph normalize_unit_norm(const WeightedGraph&);

  NodeId n_ = 0;
  std::vector<std::size_t> offsets_;  // n + 1 entries
  std::vector<Arc> arcs_;
  std::vector<double> row_sums_;
};

// Transition matrix of the natural walk: every arc x -> y gets weight
// 1/d+(x). Dangling rows stay all-zero.
inline WeightedGraph natural_walk(const WeightedGraph& g) {
  WeightedGraph out = g;
  for (NodeId x = 0; x < out.n_; ++x) {
    const NodeId d = out.out_degree(x);
    if (d == 0) continue;
    const double w = 1.0 / static_cast<double>(d);
    for (std::size_t i = out.offsets_[x]; i < out.offsets_[x + 1]; ++i)
      out.arcs_[i].weight = w;
  }
  out.recompute_row_sums();
  return out;
}

struct NormalizedGraph {
  WeightedGraph graph;
  double scale;  // weights were multiplied by this (1 / max row sum)
};

// Rescales weights by the inverse of the maximum row sum so that the matrix
// l1 norm is 1. The damping factor is NOT adjusted here; the caller decides
// what to do with the returned scale.
inline NormalizedGraph normalize_unit_norm(const WeightedGraph& g) {
  const double max_sum = g.max_row_sum();
  if (g.arc_count() == 0 || max_sum <= 0.0)
    throw std::invalid_argument("cannot normalize a graph with no arcs");
  NormalizedGraph result{g, 1.0 / max_sum};
  if (max_sum == 1.0) return result;
  for (Arc& a : result.graph.arcs_) a.weight *= result.scale;
  result.graph.recompute_row_sums();
  return result;
}

}  // namespace pushrank
