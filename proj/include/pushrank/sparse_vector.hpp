#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pushrank/types.hpp"

namespace pushrank {

/// Nonnegative sparse vector keyed by node id. Absent keys mean zero; stored
/// values are strictly positive. Entries are kept sorted by id so iteration
/// order is deterministic. The l1 norm is cached and maintained across
/// mutations.
class SparseVector {
 public:
  using Entry = std::pair<NodeId, double>;
  using const_iterator = std::vector<Entry>::const_iterator;

  SparseVector() = default;

  // chi_x: the indicator of a single node.
  static SparseVector indicator(NodeId x) {
    SparseVector v;
    v.entries_.emplace_back(x, 1.0);
    v.l1_ = 1.0;
    return v;
  }

  // Builds from (id, value) pairs. Values must be positive and ids distinct.
  static SparseVector from_entries(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    SparseVector v;
    v.entries_ = std::move(entries);
    double sum = 0.0;
    for (std::size_t i = 0; i < v.entries_.size(); ++i) {
      if (!(v.entries_[i].second > 0.0))
        throw std::invalid_argument("sparse vector entries must be positive");
      if (i > 0 && v.entries_[i].first == v.entries_[i - 1].first)
        throw std::invalid_argument("duplicate id in sparse vector");
      sum += v.entries_[i].second;
    }
    v.l1_ = sum;
    return v;
  }

  double value(NodeId x) const {
    auto it = lower_bound(x);
    return (it != entries_.end() && it->first == x) ? it->second : 0.0;
  }

  bool contains(NodeId x) const {
    auto it = lower_bound(x);
    return it != entries_.end() && it->first == x;
  }

  // this[x] += delta, delta > 0.
  void add(NodeId x, double delta) {
    assert(delta > 0.0);
    auto it = lower_bound(x);
    if (it != entries_.end() && it->first == x)
      it->second += delta;
    else
      entries_.insert(it, {x, delta});
    l1_ += delta;
  }

  // this += a * other, a > 0.
  void axpy(double a, const SparseVector& other) {
    assert(a > 0.0);
    std::vector<Entry> merged;
    merged.reserve(entries_.size() + other.entries_.size());
    auto lhs = entries_.begin();
    auto rhs = other.entries_.begin();
    while (lhs != entries_.end() || rhs != other.entries_.end()) {
      if (rhs == other.entries_.end() ||
          (lhs != entries_.end() && lhs->first < rhs->first)) {
        merged.push_back(*lhs++);
      } else if (lhs == entries_.end() || rhs->first < lhs->first) {
        merged.emplace_back(rhs->first, a * rhs->second);
        ++rhs;
      } else {
        merged.emplace_back(lhs->first, lhs->second + a * rhs->second);
        ++lhs;
        ++rhs;
      }
    }
    entries_ = std::move(merged);
    l1_ += a * other.l1_;
  }

  SparseVector& scale(double c) {
    assert(c > 0.0);
    for (auto& e : entries_) e.second *= c;
    l1_ *= c;
    return *this;
  }

  double l1() const { return l1_; }

  // Exact recomputation, used by tests to validate the cache.
  double recompute_l1() const {
    double sum = 0.0;
    for (const auto& e : entries_) sum += e.second;
    return sum;
  }

  bool is_distribution(double tol = kNormTolerance) const {
    return !entries_.empty() && std::abs(l1_ - 1.0) <= tol;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }

  NodeId max_id() const {
    assert(!entries_.empty());
    return entries_.back().first;
  }

  friend bool operator==(const SparseVector& a, const SparseVector& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<Entry>::const_iterator lower_bound(NodeId x) const {
    return std::lower_bound(
        entries_.begin(), entries_.end(), x,
        [](const Entry& e, NodeId id) { return e.first < id; });
  }
  std::vector<Entry>::iterator lower_bound(NodeId x) {
    return std::lower_bound(
        entries_.begin(), entries_.end(), x,
        [](const Entry& e, NodeId id) { return e.first < id; });
  }

  std::vector<Entry> entries_;
  double l1_ = 0.0;
};

// l1 distance between two sparse vectors.
inline double l1_distance(const SparseVector& a, const SparseVector& b) {
  double d = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      d += std::abs(ia->second);
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      d += std::abs(ib->second);
      ++ib;
    } else {
      d += std::abs(ia->second - ib->second);
      ++ia;
      ++ib;
    }
  }
  return d;
}

}  // namespace pushrank
