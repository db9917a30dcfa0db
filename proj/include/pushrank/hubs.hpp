#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pushrank/format.hpp"
#include "pushrank/push.hpp"
#include "pushrank/sparse_vector.hpp"

namespace pushrank {

/// Map from hub node x to its precomputed spectral ranking
/// s_x = (1 - alpha) chi_x (1 - alpha M)^{-1} and its l1 norm.
class HubSet {
 public:
  struct Hub {
    SparseVector ranking;
    double norm;  // ||s_x||_1
  };

  void insert(NodeId x, SparseVector ranking) {
    if (ranking.empty())
      throw std::invalid_argument("hub " + std::to_string(x) +
                                  " has no ranking vector");
    const double norm = ranking.l1();
    if (!hubs_.emplace(x, Hub{std::move(ranking), norm}).second)
      throw std::invalid_argument("hub " + std::to_string(x) +
                                  " inserted twice");
  }

  bool contains(NodeId x) const { return hubs_.count(x) != 0; }

  const Hub& at(NodeId x) const {
    const auto it = hubs_.find(x);
    if (it == hubs_.end())
      throw std::invalid_argument("no ranking for hub " + std::to_string(x));
    return it->second;
  }

  std::size_t size() const { return hubs_.size(); }
  bool empty() const { return hubs_.empty(); }

  auto begin() const { return hubs_.begin(); }
  auto end() const { return hubs_.end(); }

 private:
  std::map<NodeId, Hub> hubs_;
};

// p' = p + sum_{x in H} r_x s_x: redeems the residual parked on hub nodes.
inline SparseVector finalize_hubs(const PushRun& state, const HubSet& hubs) {
  SparseVector out = state.approximation();
  for (const auto& [x, hub] : hubs) {
    const double rx = state.residual_at(x);
    if (rx > 0.0) out.axpy(rx, hub.ranking);
  }
  return out;
}

// Seeds a run in which hub nodes are never enqueued; residual mass arriving
// at a hub stays parked in r and counts toward the virtual norms at weight
// ||s_x||_1. Exposed separately from run_with_hubs so callers can drive the
// loop stepwise (or record a trace) before finishing.
inline PushRun init_with_hubs(const WeightedGraph& g, const SparseVector& v,
                              const EngineConfig& cfg, const HubSet& hubs) {
  PushRun run(g, v, cfg);
  for (const auto& [x, hub] : hubs) run.bar_from_queue(x, hub.norm);
  return run;
}

inline RankResult finish_hub_run(PushRun& run, const HubSet& hubs) {
  RankResult res = run.run();
  res.p = finalize_hubs(run, hubs);
  res.p_norm = run.virtual_p_norm();  // incremental ||p'||_1
  res.r_norm = run.virtual_r_norm();
  res.absolute_bound = res.r_norm;
  res.relative_bound = relative_error_bound(res.r_norm, res.p_norm);
  return res;
}

inline RankResult run_with_hubs(const WeightedGraph& g, const SparseVector& v,
                                const EngineConfig& cfg, const HubSet& hubs) {
  PushRun run = init_with_hubs(g, v, cfg, hubs);
  return finish_hub_run(run, hubs);
}

/// Berkhin's variant for v = chi_x: push x once, then treat x as its own
/// hub. The geometric series 1 + r_x + r_x^2 + ... collapses the mass that
/// keeps returning to x, so the final p is scaled by 1/(1 - r_x) using the
/// terminal residual.
inline RankResult self_hub_run(const WeightedGraph& g, NodeId x,
                               const EngineConfig& cfg) {
  PushRun run(g, SparseVector::indicator(x), cfg);
  run.push_once(x);
  run.enable_self_hub(x);
  RankResult res = run.run();
  const double rx = run.residual_at(x);
  if (rx >= 1.0)
    throw std::runtime_error("self-hub residual reached 1; state corrupt");
  const double factor = 1.0 / (1.0 - rx);
  if (factor != 1.0) res.p.scale(factor);
  res.p_norm = run.p_norm() * factor;
  // error algebra: s_x - p/(1-r_x) = (1-alpha) r'(1-alpha M)^{-1} / (1-r_x)
  res.r_norm = run.virtual_r_norm() * factor;
  res.absolute_bound = res.r_norm;
  res.relative_bound = relative_error_bound(res.r_norm, res.p_norm);
  return res;
}

// --- hub file format ---
// One section per hub:
//   #hub <node> alpha=<alpha> graph=<hex digest>
//   <node>\t<value>
//   ...

struct HubFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Alpha or graph digest in a vector file does not match the current run.
struct DigestMismatchError : HubFileError {
  using HubFileError::HubFileError;
};

namespace detail {

// "alpha=<a> graph=<d>" suffix shared by hub and patch headers.
inline void check_vector_header(std::string_view alpha_field,
                                std::string_view graph_field, double alpha,
                                std::string_view digest,
                                std::size_t lineno) {
  if (!alpha_field.starts_with("alpha=") || !graph_field.starts_with("graph="))
    throw HubFileError("line " + std::to_string(lineno) +
                       ": malformed header");
  const auto file_alpha = parse_double(alpha_field.substr(6));
  if (!file_alpha)
    throw HubFileError("line " + std::to_string(lineno) +
                       ": malformed alpha in header");
  if (*file_alpha != alpha)
    throw DigestMismatchError(
        "vector file was computed for alpha=" + format_double(*file_alpha) +
        ", expected alpha=" + format_double(alpha));
  if (graph_field.substr(6) != digest)
    throw DigestMismatchError("vector file graph digest mismatch");
}

inline std::pair<NodeId, double> parse_tsv_entry(
    const std::vector<std::string_view>& fields, std::size_t lineno) {
  if (fields.size() != 2)
    throw HubFileError("line " + std::to_string(lineno) +
                       ": expected \"node\\tvalue\"");
  const auto id = parse_unsigned(fields[0]);
  const auto value = parse_double(fields[1]);
  if (!id || !value)
    throw HubFileError("line " + std::to_string(lineno) + ": malformed entry");
  return {static_cast<NodeId>(*id), *value};
}

}  // namespace detail

inline void write_hub_file(std::ostream& out, const HubSet& hubs, double alpha,
                           std::string_view digest) {
  for (const auto& [x, hub] : hubs) {
    out << "#hub " << x << " alpha=" << format_double(alpha) << " graph="
        << digest << '\n';
    for (const auto& [id, value] : hub.ranking)
      out << id << '\t' << format_double(value) << '\n';
  }
}

// Loads hub sections, validating every header against the expected alpha and
// graph digest.
inline HubSet read_hub_file(std::istream& in, double alpha,
                            std::string_view digest) {
  HubSet hubs;
  std::string line;
  std::size_t lineno = 0;
  bool in_section = false;
  NodeId current = 0;
  std::vector<SparseVector::Entry> entries;
  const auto flush = [&] {
    if (in_section) hubs.insert(current, SparseVector::from_entries(std::move(entries)));
    entries = {};
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    if (fields[0] == "#hub") {
      if (fields.size() != 4)
        throw HubFileError("line " + std::to_string(lineno) +
                           ": malformed #hub header");
      const auto node = parse_unsigned(fields[1]);
      if (!node)
        throw HubFileError("line " + std::to_string(lineno) +
                           ": malformed hub node id");
      detail::check_vector_header(fields[2], fields[3], alpha, digest, lineno);
      flush();
      in_section = true;
      current = static_cast<NodeId>(*node);
      continue;
    }
    if (fields[0].front() == '#') continue;
    if (!in_section)
      throw HubFileError("line " + std::to_string(lineno) +
                         ": entry before any #hub header");
    entries.push_back(detail::parse_tsv_entry(fields, lineno));
  }
  flush();
  return hubs;
}

}  // namespace pushrank
