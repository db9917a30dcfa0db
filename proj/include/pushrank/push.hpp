#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pushrank/graph.hpp"
#include "pushrank/sparse_vector.hpp"
#include "pushrank/types.hpp"

namespace pushrank {

enum class Criterion {
  AbsoluteResidual,  // stop when ||r||_1 <= epsilon
  RelativeResidual,  // stop when ||r||_1 / ||p||_1 <= epsilon
};

enum class QueueKind {
  Priority,  // indirect max-heap on residual, O(log q) per update
  Fifo,      // constant-time queue, nodes never enqueued twice
};

struct EngineConfig {
  double alpha = 0.85;
  double epsilon = 1e-6;
  Criterion criterion = Criterion::RelativeResidual;
  QueueKind queue = QueueKind::Priority;
  std::optional<std::uint64_t> max_pushes;  // safety rail; unset = unlimited
};

struct PushStats {
  std::uint64_t pushes = 0;
  std::uint64_t arcs_traversed = 0;
  std::uint64_t queue_ops = 0;  // enqueues, dequeues, priority raises
  std::uint64_t visited = 0;    // distinct nodes that ever held nonzero p or r
};

struct RankResult {
  SparseVector p;
  double p_norm = 0.0;
  double r_norm = 0.0;
  double absolute_bound = 0.0;  // = r_norm
  double relative_bound = 0.0;  // = r_norm / p_norm, inf if p_norm == 0
  PushStats stats;
  bool truncated = false;  // max_pushes hit before the criterion was met
};

// r_norm / p_norm, with the degenerate cases pinned: 0 when the residual is
// gone, inf while p is still empty.
inline double relative_error_bound(double r_norm, double p_norm) {
  if (p_norm > 0.0) return r_norm / p_norm;
  return r_norm == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

// A node needs pushing only while r_x exceeds this value: if every node
// fails the test, the sum over all n nodes gives ||r||_1 <= eps * ||p||_1
// (relative) or ||r||_1 <= eps (absolute).
inline double push_threshold(const EngineConfig& cfg, double p_norm, NodeId n) {
  assert(n >= 1);
  const double mass =
      cfg.criterion == Criterion::RelativeResidual ? cfg.epsilon * p_norm
                                                   : cfg.epsilon;
  return mass / static_cast<double>(n);
}

namespace detail {

// Indirect binary max-heap over local node slots. The priority of an element
// can be raised at any time; removal by slot is supported so hub nodes can be
// pulled out. Ties are broken toward the smaller global node id, which makes
// push traces reproducible.
class IndexedMaxHeap {
 public:
  struct Top {
    std::uint32_t local;
    double key;
  };

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

  bool contains(std::uint32_t local) const {
    return local < pos_.size() && pos_[local] != kAbsent;
  }

  void push(std::uint32_t local, double key, NodeId global) {
    if (local >= pos_.size()) pos_.resize(local + 1, kAbsent);
    assert(pos_[local] == kAbsent);
    pos_[local] = static_cast<std::uint32_t>(heap_.size());
    heap_.push_back({key, global, local});
    sift_up(heap_.size() - 1);
  }

  void raise_key(std::uint32_t local, double key) {
    const std::uint32_t i = pos_[local];
    assert(i != kAbsent);
    assert(key >= heap_[i].key);
    heap_[i].key = key;
    sift_up(i);
  }

  Top top() const {
    assert(!heap_.empty());
    return {heap_.front().local, heap_.front().key};
  }

  void pop() { remove_at(0); }

  void remove(std::uint32_t local) {
    assert(contains(local));
    remove_at(pos_[local]);
  }

 private:
  struct Entry {
    double key;
    NodeId global;
    std::uint32_t local;
  };

  static constexpr std::uint32_t kAbsent =
      std::numeric_limits<std::uint32_t>::max();

  static bool higher(const Entry& a, const Entry& b) {
    if (a.key != b.key) return a.key > b.key;
    return a.global < b.global;
  }

  void remove_at(std::size_t i) {
    pos_[heap_[i].local] = kAbsent;
    if (i + 1 == heap_.size()) {
      heap_.pop_back();
      return;
    }
    heap_[i] = heap_.back();
    heap_.pop_back();
    pos_[heap_[i].local] = static_cast<std::uint32_t>(i);
    const std::size_t settled = sift_down(i);
    if (settled == i) sift_up(i);
  }

  void sift_up(std::size_t i) {
    Entry e = heap_[i];
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!higher(e, heap_[parent])) break;
      heap_[i] = heap_[parent];
      pos_[heap_[i].local] = static_cast<std::uint32_t>(i);
      i = parent;
    }
    heap_[i] = e;
    pos_[e.local] = static_cast<std::uint32_t>(i);
  }

  std::size_t sift_down(std::size_t i) {
    Entry e = heap_[i];
    const std::size_t n = heap_.size();
    while (true) {
      std::size_t child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && higher(heap_[child + 1], heap_[child])) ++child;
      if (!higher(heap_[child], e)) break;
      heap_[i] = heap_[child];
      pos_[heap_[i].local] = static_cast<std::uint32_t>(i);
      i = child;
    }
    heap_[i] = e;
    pos_[e.local] = static_cast<std::uint32_t>(i);
    return i;
  }

  std::vector<Entry> heap_;
  std::vector<std::uint32_t> pos_;  // local slot -> heap index
};

}  // namespace detail

/// One execution of the push algorithm over an immutable graph. Maintains
/// the pair (p, r) with the invariant
///
///   p + (1 - alpha) r (1 - alpha M)^{-1} = (1 - alpha) v (1 - alpha M)^{-1}
///
/// along with cached l1 norms, the scheduling queue, and the bijection
/// between visited nodes and local slots assigned in discovery order. All
/// per-node storage is indexed by local slot, so memory scales with the
/// visited neighbourhood rather than with the graph.
///
/// Hub and patch variants hook in through bar_from_queue / enable_patch /
/// enable_self_hub; a plain run uses none of them. A PushRun is confined to
/// one thread; the underlying graph may be shared.
class PushRun {
 public:
  PushRun(const WeightedGraph& g, const SparseVector& v, EngineConfig cfg)
      : g_(&g), cfg_(cfg) {
    if (!(cfg.alpha >= 0.0 && cfg.alpha < 1.0))
      throw std::invalid_argument("alpha must lie in [0, 1)");
    if (!(cfg.epsilon > 0.0))
      throw std::invalid_argument("epsilon must be positive");
    if (v.empty()) throw std::invalid_argument("empty preference vector");
    if (!v.is_distribution())
      throw std::invalid_argument("preference is not a distribution");
    if (v.max_id() >= g.node_count())
      throw std::invalid_argument("preference support exceeds graph size");
    if (!g.is_substochastic())
      throw std::invalid_argument("matrix is not substochastic");
    // p = 0, r = v; the queue starts as the support of v, discovered in
    // input order.
    for (const auto& [id, value] : v) {
      const std::uint32_t l = discover(id);
      r_[l] = value;
      r_norm_ += value;
      queue_insert(l);
    }
  }

  /// Next node to push: in Priority mode the queued node with maximal
  /// residual (ties toward the smaller id), in Fifo mode the oldest queued
  /// node still above the threshold. Empty when no queued node qualifies,
  /// which is the termination signal.
  std::optional<NodeId> select_next() {
    const double thr = current_threshold();
    if (cfg_.queue == QueueKind::Priority) {
      if (heap_.empty()) return std::nullopt;
      const auto top = heap_.top();
      if (!(top.key > thr)) return std::nullopt;  // max fails => all fail
      heap_.pop();
      ++stats_.queue_ops;
      return global_of_local_[top.local];
    }
    while (!fifo_.empty()) {
      const std::uint32_t l = fifo_.front();
      fifo_.pop_front();
      in_fifo_[l] = 0;
      ++stats_.queue_ops;
      if (is_barred(global_of_local_[l])) continue;  // barred while queued
      if (r_[l] > thr) return global_of_local_[l];
      // fell below the threshold since enqueueing; re-added if it rises
    }
    return std::nullopt;
  }

  /// The atomic update: moves (1 - alpha) r_x into p_x, zeroes r_x, and
  /// spreads alpha r_x m_xy to each successor y. On a dangling node in patch
  /// mode the outflow goes to theta instead of vanishing.
  void push_once(NodeId x) {
    const auto it = local_of_global_.find(x);
    if (it == local_of_global_.end())
      throw std::logic_error("push on a node with zero residual");
    const std::uint32_t l = it->second;
    const double rx = r_[l];
    if (!(rx > 0.0))
      throw std::logic_error("push on a node with zero residual");
    if (cfg_.queue == QueueKind::Priority && heap_.contains(l)) {
      heap_.remove(l);  // callers may bypass select_next
      ++stats_.queue_ops;
    }
    const double alpha = cfg_.alpha;
    const double gain = (1.0 - alpha) * rx;
    p_[l] += gain;
    p_norm_ += gain;
    r_[l] = 0.0;  // assignment, not subtraction: no negative dust
    r_norm_ -= rx;
    if (r_norm_ < 0.0) r_norm_ = 0.0;  // cancellation dust
    const auto bar = barred_.find(x);
    if (bar != barred_.end()) {
      barred_r_sum_ -= rx;
      barred_r_weighted_ -= rx * bar->second;
    }
    const auto arcs = g_->out_arcs(x);
    if (arcs.empty()) {
      if (patch_enabled_) theta_ += alpha * rx;
    } else if (alpha > 0.0) {
      for (const Arc& a : arcs) {
        const double delta = alpha * rx * a.weight;
        if (delta > 0.0) add_residual(a.target, delta);
      }
    }
    stats_.arcs_traversed += arcs.size();
    ++stats_.pushes;
    if (trace_enabled_) trace_.push_back(x);
  }

  /// Pushes until no queued node passes the threshold or max_pushes is
  /// exhausted. The returned p underestimates the exact ranking by at most
  /// r_norm in l1.
  RankResult run() {
    bool truncated = false;
    while (true) {
      if (cfg_.max_pushes && stats_.pushes >= *cfg_.max_pushes) {
        truncated = has_pushable();
        break;
      }
      const auto x = select_next();
      if (!x) break;
      push_once(*x);
    }
    return make_result(truncated);
  }

  // --- norms and bounds ---

  double p_norm() const { return p_norm_; }
  double r_norm() const { return r_norm_; }
  double theta() const { return theta_; }

  // Norms of the virtual pair (p', r') used for convergence decisions. For
  // a plain run these equal the raw norms; with hubs, residual parked on hub
  // nodes counts toward p' at weight ||s_x||_1 and leaves r'; with patching,
  // theta counts toward p' at weight ||s||_1.
  double virtual_p_norm() const {
    if (self_hub_) {
      const double rx = residual_at(*self_hub_);
      if (rx >= 1.0)
        throw std::runtime_error("self-hub residual reached 1; state corrupt");
      return p_norm_ / (1.0 - rx);
    }
    return p_norm_ + barred_r_weighted_ + theta_ * patch_s_norm_;
  }

  double virtual_r_norm() const {
    return std::max(0.0, r_norm_ - barred_r_sum_);
  }

  // (absolute, relative): the residual norm bounds the absolute l1 error;
  // since p approximates from below, r_norm / p_norm bounds the relative
  // l1 error. Relative is inf while p = 0 and 0 once the residual is gone.
  std::pair<double, double> error_bounds() const {
    const double abs = virtual_r_norm();
    return {abs, relative_error_bound(abs, virtual_p_norm())};
  }

  double current_threshold() const {
    return push_threshold(cfg_, virtual_p_norm(), g_->node_count());
  }

  // --- state inspection ---

  double residual_at(NodeId x) const {
    const auto it = local_of_global_.find(x);
    return it == local_of_global_.end() ? 0.0 : r_[it->second];
  }

  double approximation_at(NodeId x) const {
    const auto it = local_of_global_.find(x);
    return it == local_of_global_.end() ? 0.0 : p_[it->second];
  }

  SparseVector approximation() const { return snapshot(p_); }
  SparseVector residual() const { return snapshot(r_); }

  const PushStats& stats() const { return stats_; }
  const EngineConfig& config() const { return cfg_; }
  const WeightedGraph& graph() const { return *g_; }

  // Size of the per-node working arrays; equals the visited count.
  std::size_t allocated_slots() const { return r_.size(); }

  // --- variant hooks (hub / self-hub / patch engines) ---

  /// Never enqueue x again and remove it from the queue now. Residual
  /// arriving at x keeps accumulating in r but counts toward the virtual
  /// norms with the given weight (||s_x||_1 for a hub).
  void bar_from_queue(NodeId x, double finalize_weight) {
    const auto [bar, inserted] = barred_.try_emplace(x, finalize_weight);
    if (!inserted) throw std::logic_error("node barred twice");
    const auto it = local_of_global_.find(x);
    if (it == local_of_global_.end()) return;
    const std::uint32_t l = it->second;
    if (cfg_.queue == QueueKind::Priority && heap_.contains(l)) {
      heap_.remove(l);
      ++stats_.queue_ops;
    }
    // fifo entries are skipped lazily at dequeue
    barred_r_sum_ += r_[l];
    barred_r_weighted_ += r_[l] * finalize_weight;
  }

  bool is_barred(NodeId x) const { return barred_.count(x) != 0; }

  /// Dangling pushes route alpha r_x into theta; theta * s_norm counts
  /// toward the virtual p norm.
  void enable_patch(double s_norm) {
    patch_enabled_ = true;
    patch_s_norm_ = s_norm;
  }

  /// Berkhin variant: after its first push, the source x acts as its own
  /// hub. Residual returning to x is excluded from convergence and redeemed
  /// at the end by the 1/(1 - r_x) scaling.
  void enable_self_hub(NodeId x) {
    bar_from_queue(x, 0.0);
    self_hub_ = x;
  }

  void enable_trace() { trace_enabled_ = true; }
  const std::vector<NodeId>& trace() const { return trace_; }

  /// Result snapshot under plain-run semantics (raw norms, raw p). Variant
  /// drivers build their adjusted results on top of this.
  RankResult make_result(bool truncated = false) const {
    RankResult res;
    res.p = approximation();
    res.p_norm = p_norm_;
    res.r_norm = r_norm_;
    res.absolute_bound = r_norm_;
    res.relative_bound = relative_error_bound(r_norm_, p_norm_);
    res.stats = stats_;
    res.truncated = truncated;
    return res;
  }

  bool has_pushable() const {
    const double thr = current_threshold();
    if (cfg_.queue == QueueKind::Priority)
      return !heap_.empty() && heap_.top().key > thr;
    for (const std::uint32_t l : fifo_)
      if (!is_barred(global_of_local_[l]) && r_[l] > thr) return true;
    return false;
  }

 private:
  std::uint32_t discover(NodeId global) {
    const auto [it, inserted] = local_of_global_.try_emplace(
        global, static_cast<std::uint32_t>(global_of_local_.size()));
    if (inserted) {
      global_of_local_.push_back(global);
      p_.push_back(0.0);
      r_.push_back(0.0);
      in_fifo_.push_back(0);
      ++stats_.visited;
    }
    return it->second;
  }

  void add_residual(NodeId y, double delta) {
    const std::uint32_t l = discover(y);
    r_[l] += delta;
    r_norm_ += delta;
    const auto bar = barred_.find(y);
    if (bar != barred_.end()) {
      barred_r_sum_ += delta;
      barred_r_weighted_ += delta * bar->second;
      return;  // hub nodes are never enqueued
    }
    if (cfg_.queue == QueueKind::Priority) {
      if (heap_.contains(l)) {
        heap_.raise_key(l, r_[l]);
        ++stats_.queue_ops;
      } else if (r_[l] > current_threshold()) {
        heap_.push(l, r_[l], y);
        ++stats_.queue_ops;
      }
    } else if (!in_fifo_[l] && r_[l] > current_threshold()) {
      fifo_.push_back(l);
      in_fifo_[l] = 1;
      ++stats_.queue_ops;
    }
  }

  // Unconditional insert used while seeding the initial queue.
  void queue_insert(std::uint32_t l) {
    if (cfg_.queue == QueueKind::Priority) {
      heap_.push(l, r_[l], global_of_local_[l]);
    } else {
      fifo_.push_back(l);
      in_fifo_[l] = 1;
    }
    ++stats_.queue_ops;
  }

  SparseVector snapshot(const std::vector<double>& values) const {
    std::vector<SparseVector::Entry> entries;
    for (std::size_t l = 0; l < values.size(); ++l)
      if (values[l] > 0.0) entries.emplace_back(global_of_local_[l], values[l]);
    return SparseVector::from_entries(std::move(entries));
  }

  const WeightedGraph* g_;
  EngineConfig cfg_;

  // discovery-order bijection; all per-node arrays below use local slots
  std::unordered_map<NodeId, std::uint32_t> local_of_global_;
  std::vector<NodeId> global_of_local_;

  std::vector<double> p_;
  std::vector<double> r_;
  double p_norm_ = 0.0;
  double r_norm_ = 0.0;

  detail::IndexedMaxHeap heap_;
  std::deque<std::uint32_t> fifo_;
  std::vector<std::uint8_t> in_fifo_;

  std::unordered_map<NodeId, double> barred_;  // node -> finalize weight
  double barred_r_sum_ = 0.0;       // sum of r over barred nodes
  double barred_r_weighted_ = 0.0;  // sum of r_x * weight_x over barred nodes

  bool patch_enabled_ = false;
  double patch_s_norm_ = 0.0;
  double theta_ = 0.0;

  std::optional<NodeId> self_hub_;

  bool trace_enabled_ = false;
  std::vector<NodeId> trace_;

  PushStats stats_;
};

/// Full push run: init, iterate, and package the result.
inline RankResult run_push(const WeightedGraph& g, const SparseVector& v,
                           const EngineConfig& cfg) {
  return PushRun(g, v, cfg).run();
}

}  // namespace pushrank
