#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pushrank/format.hpp"
#include "pushrank/hubs.hpp"
#include "pushrank/push.hpp"
#include "pushrank/sparse_vector.hpp"

namespace pushrank {

/// Push run against the patched matrix P (every zero row of M replaced by
/// the distribution u) without ever materializing P. Rank mass flowing
/// through dangling nodes accumulates in the scalar theta and is redeemed at
/// the end as theta * s, where s is the precomputed ranking of P with
/// preference u. The invariant is
///
///   p + (1 - alpha)(r + theta u)(1 - alpha P)^{-1}
///     = (1 - alpha) v (1 - alpha P)^{-1}.
class PatchRun {
 public:
  PatchRun(const WeightedGraph& g, const SparseVector& v,
           const SparseVector& u, const EngineConfig& cfg, SparseVector s)
      : base_(g, v, cfg), u_(u), s_(std::move(s)) {
    if (!u.is_distribution())
      throw std::invalid_argument("patch vector u is not a distribution");
    if (u.max_id() >= g.node_count())
      throw std::invalid_argument("patch vector u exceeds graph size");
    if (s_.empty())
      throw std::invalid_argument("precomputed patch ranking s is missing");
    if (s_.max_id() >= g.node_count())
      throw std::invalid_argument("patch ranking s exceeds graph size");
    base_.enable_patch(s_.l1());
  }

  PushRun& base() { return base_; }
  const PushRun& base() const { return base_; }

  double theta() const { return base_.theta(); }
  const SparseVector& patch_distribution() const { return u_; }
  const SparseVector& patch_ranking() const { return s_; }
  double patch_ranking_norm() const { return s_.l1(); }

  // p' = p + theta * s.
  SparseVector finalize() const {
    SparseVector out = base_.approximation();
    if (base_.theta() > 0.0) out.axpy(base_.theta(), s_);
    return out;
  }

  RankResult run() {
    RankResult res = base_.run();
    if (base_.theta() > 0.0) {
      res.p = finalize();
      res.p_norm = res.p.l1();
      res.relative_bound = relative_error_bound(res.r_norm, res.p_norm);
    }
    return res;
  }

 private:
  PushRun base_;
  SparseVector u_;
  SparseVector s_;
};

inline RankResult run_with_patch(const WeightedGraph& g, const SparseVector& v,
                                 const SparseVector& u,
                                 const EngineConfig& cfg, SparseVector s) {
  return PatchRun(g, v, u, cfg, std::move(s)).run();
}

inline SparseVector finalize_patch(const PatchRun& state) {
  return state.finalize();
}

// --- patch vector file format ---
//   #patch alpha=<alpha> graph=<hex digest>
//   <node>\t<value>
//   ...

inline void write_patch_file(std::ostream& out, const SparseVector& s,
                             double alpha, std::string_view digest) {
  out << "#patch alpha=" << format_double(alpha) << " graph=" << digest
      << '\n';
  for (const auto& [id, value] : s)
    out << id << '\t' << format_double(value) << '\n';
}

inline SparseVector read_patch_file(std::istream& in, double alpha,
                                    std::string_view digest) {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::vector<SparseVector::Entry> entries;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    if (fields[0] == "#patch") {
      if (have_header || fields.size() != 3)
        throw HubFileError("line " + std::to_string(lineno) +
                           ": malformed #patch header");
      detail::check_vector_header(fields[1], fields[2], alpha, digest, lineno);
      have_header = true;
      continue;
    }
    if (fields[0].front() == '#') continue;
    if (!have_header)
      throw HubFileError("line " + std::to_string(lineno) +
                         ": entry before the #patch header");
    entries.push_back(detail::parse_tsv_entry(fields, lineno));
  }
  if (!have_header) throw HubFileError("missing #patch header");
  return SparseVector::from_entries(std::move(entries));
}

}  // namespace pushrank
