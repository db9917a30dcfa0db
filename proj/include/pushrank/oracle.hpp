#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pushrank/graph.hpp"
#include "pushrank/sparse_vector.hpp"
#include "pushrank/types.hpp"

// Dense, slow, trusted computations: exact spectral rankings, patched-matrix
// solves, and path functions. Used by tests, hub precomputation, and patch
// vectors. Everything here is O(n^2) memory or worse, hence the size guard.
namespace pushrank::oracle {

using DenseVector = std::vector<double>;

inline constexpr NodeId kMaxNodes = 5000;

// Thrown when a graph exceeds the oracle size guard (CLI maps this to its
// own exit code).
struct SizeGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_size(NodeId n) {
  if (n > kMaxNodes)
    throw SizeGuardError("graph too large for the dense oracle (n = " +
                         std::to_string(n) + ", limit " +
                         std::to_string(kMaxNodes) + ")");
}

inline DenseVector to_dense(const SparseVector& v, NodeId n) {
  DenseVector out(n, 0.0);
  for (const auto& [id, value] : v) {
    if (id >= n) throw std::invalid_argument("vector id out of range");
    out[id] = value;
  }
  return out;
}

// Positive entries only; nonpositive dust is dropped.
inline SparseVector to_sparse(const DenseVector& v) {
  std::vector<SparseVector::Entry> entries;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] > 0.0) entries.emplace_back(static_cast<NodeId>(i), v[i]);
  return SparseVector::from_entries(std::move(entries));
}

/// Direct-solve spectral ranker: factorizes (I - alpha M)^T once (partial
/// pivoting, row-vector convention) and answers
///   rank(v) = (1 - alpha) v (I - alpha M)^{-1}
/// for any preference v. Pass a patch distribution u to rank against the
/// patched matrix P, where every zero row of M is replaced by u.
class DenseRanker {
 public:
  DenseRanker(const WeightedGraph& g, double alpha)
      : DenseRanker(g, alpha, nullptr) {}

  DenseRanker(const WeightedGraph& g, double alpha, const DenseVector& patch_u)
      : DenseRanker(g, alpha, &patch_u) {}

  DenseVector rank(const DenseVector& v) const {
    if (v.size() != n_) throw std::invalid_argument("preference size mismatch");
    Eigen::VectorXd b(static_cast<Eigen::Index>(n_));
    for (NodeId i = 0; i < n_; ++i) b(i) = (1.0 - alpha_) * v[i];
    Eigen::VectorXd w = lu_.solve(b);
    DenseVector out(n_);
    for (NodeId i = 0; i < n_; ++i) out[i] = w(i);
    return out;
  }

  SparseVector rank(const SparseVector& v) const {
    return to_sparse(rank(to_dense(v, n_)));
  }

  double alpha() const { return alpha_; }
  NodeId size() const { return n_; }

 private:
  DenseRanker(const WeightedGraph& g, double alpha, const DenseVector* patch_u)
      : alpha_(alpha), n_(g.node_count()) {
    check_size(n_);
    if (!(alpha >= 0.0 && alpha < 1.0))
      throw std::invalid_argument("alpha must lie in [0, 1)");
    if (!g.is_substochastic())
      throw std::invalid_argument("matrix is not substochastic");
    if (patch_u) {
      if (patch_u->size() != n_)
        throw std::invalid_argument("patch distribution size mismatch");
      double sum = 0.0;
      for (double u : *patch_u) sum += u;
      if (std::abs(sum - 1.0) > kNormTolerance)
        throw std::invalid_argument("patch vector is not a distribution");
    }
    // A = (I - alpha P)^T, i.e. A(y, x) = [x == y] - alpha p_xy.
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n_, n_);
    for (NodeId x = 0; x < n_; ++x) {
      if (patch_u && g.is_dangling(x)) {
        for (NodeId y = 0; y < n_; ++y) a(y, x) -= alpha * (*patch_u)[y];
        continue;
      }
      for (const Arc& arc : g.out_arcs(x)) a(arc.target, x) -= alpha * arc.weight;
    }
    lu_ = Eigen::PartialPivLU<Eigen::MatrixXd>(a);
  }

  double alpha_;
  NodeId n_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

// rank(v) by direct dense solve.
inline DenseVector dense_rank(const WeightedGraph& g, const DenseVector& v,
                              double alpha) {
  return DenseRanker(g, alpha).rank(v);
}

// Same quantity by summing the Neumann series (1-alpha) sum_k alpha^k v M^k,
// truncated when the remaining tail is provably below 1e-15. Kept free of
// any factorization so it can cross-check the solve route.
inline DenseVector dense_rank_series(const WeightedGraph& g,
                                     const DenseVector& v, double alpha) {
  const NodeId n = g.node_count();
  check_size(n);
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in [0, 1)");
  if (v.size() != n) throw std::invalid_argument("preference size mismatch");
  constexpr double kTail = 1e-15;
  // alpha^k <= kTail needs k ~ ln(kTail)/ln(alpha); refuse alphas so close
  // to 1 that the series cannot reach the tail bound in reasonable time
  constexpr std::uint64_t kMaxTerms = 1000000;

  DenseVector term = v;  // alpha^k v M^k
  DenseVector result(n, 0.0);
  DenseVector next(n, 0.0);
  for (std::uint64_t k = 0;; ++k) {
    if (k >= kMaxTerms)
      throw std::runtime_error(
          "series route did not reach the tail bound; alpha too close to 1");
    double term_norm = 0.0;
    for (NodeId i = 0; i < n; ++i) {
      result[i] += (1.0 - alpha) * term[i];
      term_norm += std::abs(term[i]);
    }
    // tail after this term is bounded by alpha * ||term||_1
    if (alpha * term_norm <= kTail) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (NodeId x = 0; x < n; ++x) {
      if (term[x] == 0.0) continue;
      const double scaled = alpha * term[x];
      for (const Arc& arc : g.out_arcs(x)) next[arc.target] += scaled * arc.weight;
    }
    term.swap(next);
  }
  return result;
}

// Ranking of the patched matrix P (zero rows of M replaced by u) with
// preference v.
inline DenseVector dense_rank_patched(const WeightedGraph& g,
                                      const DenseVector& u,
                                      const DenseVector& v, double alpha) {
  return DenseRanker(g, alpha, u).rank(v);
}

struct PathCount {
  std::uint64_t count = 0;
  bool saturated = false;  // some addition overflowed; count is a floor
};

// P_x(t): number of walks (arc sequences; vertices may repeat) of length
// 0..t starting at x. Dynamic programming on per-node walk counts, with
// saturating arithmetic.
inline PathCount path_function(const WeightedGraph& g, NodeId x, unsigned t) {
  const NodeId n = g.node_count();
  if (x >= n) throw std::invalid_argument("node out of range");
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  bool saturated = false;
  auto sat_add = [&](std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_add_overflow(a, b, &r)) {
      saturated = true;
      return kMax;
    }
    return r;
  };

  std::vector<std::uint64_t> walks(n, 0);  // walks of length k from x, by endpoint
  walks[x] = 1;
  std::uint64_t total = 1;  // the empty path
  std::vector<std::uint64_t> next(n, 0);
  for (unsigned k = 1; k <= t; ++k) {
    std::fill(next.begin(), next.end(), 0);
    std::uint64_t level = 0;
    for (NodeId z = 0; z < n; ++z) {
      if (walks[z] == 0) continue;
      for (const Arc& arc : g.out_arcs(z)) {
        next[arc.target] = sat_add(next[arc.target], walks[z]);
        level = sat_add(level, walks[z]);
      }
    }
    total = sat_add(total, level);
    walks.swap(next);
    if (level == 0) break;  // no longer walks exist
  }
  return {total, saturated};
}

}  // namespace pushrank::oracle
