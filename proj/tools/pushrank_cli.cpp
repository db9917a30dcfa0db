// Command-line surface for spectral rankings via the push algorithm:
//   rank     approximate ranking with exact residual-based error control
//   oracle   dense reference ranking (small graphs only)
//   compare  run both and check the claimed error bound
//   hubs     precompute hub ranking files
//   patch    precompute dangling-patch ranking files
//
// Exit codes: 0 ok, 1 I/O or parse error, 2 invalid flag combination,
// 3 max-pushes exhausted (partial output written), 4 oracle size guard.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pushrank/pushrank.hpp"

namespace {

using namespace pushrank;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitTruncated = 3;
constexpr int kExitOracleGuard = 4;

struct GraphOptions {
  std::string path;
  bool natural_walk = false;
  bool normalize = false;
};

struct PreferenceChoice {
  std::optional<NodeId> source;
  std::string pref_file;  // path or the magic name "uniform"
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Field count of the first data line decides between "src dst" and
// "src dst weight".
bool sniff_weighted(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = detail::split_ws(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    return fields.size() >= 3;
  }
  return false;
}

WeightedGraph load_graph(const GraphOptions& opt) {
  const std::string text = read_file(opt.path);
  std::istringstream in(text);
  WeightedGraph g = WeightedGraph::from_edge_list(in, sniff_weighted(text));
  if (g.node_count() == 0) throw std::runtime_error(opt.path + ": no arcs");
  if (opt.natural_walk) g = natural_walk(g);
  if (opt.normalize) {
    auto normalized = normalize_unit_norm(g);
    std::cerr << "normalization scale: " << format_double(normalized.scale)
              << " (damping factor not adjusted)\n";
    g = std::move(normalized.graph);
  }
  return g;
}

SparseVector uniform_preference(NodeId n) {
  std::vector<SparseVector::Entry> entries;
  entries.reserve(n);
  for (NodeId i = 0; i < n; ++i)
    entries.emplace_back(i, 1.0 / static_cast<double>(n));
  return SparseVector::from_entries(std::move(entries));
}

// TSV "node\tweight", normalized to a distribution with a warning when the
// input was off by more than 1e-9 relatively.
SparseVector load_preference_file(const std::string& path, NodeId n) {
  if (path == "uniform") return uniform_preference(n);
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<SparseVector::Entry> entries;
  double sum = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = detail::split_ws(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() != 2)
      throw std::runtime_error(path + " line " + std::to_string(lineno) +
                               ": expected \"node\\tweight\"");
    const auto id = parse_unsigned(fields[0]);
    const auto weight = parse_double(fields[1]);
    if (!id || !weight || *weight <= 0.0)
      throw std::runtime_error(path + " line " + std::to_string(lineno) +
                               ": malformed entry");
    if (*id >= n)
      throw std::runtime_error(path + " line " + std::to_string(lineno) +
                               ": node " + std::to_string(*id) +
                               " out of range");
    entries.emplace_back(static_cast<NodeId>(*id), *weight);
    sum += *weight;
  }
  if (entries.empty()) throw std::runtime_error(path + ": empty preference");
  if (std::abs(sum - 1.0) > 1e-9)
    std::cerr << "warning: preference renormalized (l1 was "
              << format_double(sum) << ")\n";
  for (auto& e : entries) e.second /= sum;
  return SparseVector::from_entries(std::move(entries));
}

SparseVector resolve_preference(const PreferenceChoice& choice, NodeId n) {
  if (choice.source) {
    if (*choice.source >= n)
      throw std::runtime_error("source node " + std::to_string(*choice.source) +
                               " out of range (n = " + std::to_string(n) + ")");
    return SparseVector::indicator(*choice.source);
  }
  return load_preference_file(choice.pref_file, n);
}

// "node\tscore" sorted by descending score, then ascending id.
void write_ranking(std::ostream& out, const SparseVector& p) {
  std::vector<SparseVector::Entry> rows(p.begin(), p.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [id, score] : rows)
    out << id << '\t' << format_double(score) << '\n';
}

const char* criterion_name(Criterion c) {
  return c == Criterion::RelativeResidual ? "rel" : "abs";
}
const char* queue_name(QueueKind q) {
  return q == QueueKind::Priority ? "priority" : "fifo";
}

void write_stats(const RankResult& res, const EngineConfig& cfg,
                 const std::string& digest, double wall_seconds) {
  std::cerr << "alpha: " << format_double(cfg.alpha) << '\n'
            << "epsilon: " << format_double(cfg.epsilon) << '\n'
            << "criterion: " << criterion_name(cfg.criterion) << '\n'
            << "queue: " << queue_name(cfg.queue) << '\n'
            << "pushes: " << res.stats.pushes << '\n'
            << "arcs traversed: " << res.stats.arcs_traversed << '\n'
            << "queue ops: " << res.stats.queue_ops << '\n'
            << "visited: " << res.stats.visited << '\n'
            << "p norm: " << format_double(res.p_norm) << '\n'
            << "residual norm: " << format_double(res.r_norm) << '\n'
            << "absolute bound: " << format_double(res.absolute_bound) << '\n'
            << "relative bound: " << format_double(res.relative_bound) << '\n'
            << "graph digest: " << digest << '\n'
            << "wall time: " << format_double(wall_seconds) << " s\n";
}

// Options shared by `rank` and `compare`.
struct RankOptions {
  GraphOptions graph;
  double alpha = 0.85;
  double epsilon = 1e-6;
  PreferenceChoice pref;
  NodeId source_value = 0;
  std::string queue = "priority";
  std::string criterion = "rel";
  std::string hubs_file;
  std::string patch_u;
  std::string patch_s;
  bool self_hub = false;
  bool stats = false;
  long long max_pushes = -1;  // -1: default 10n rail, 0: unlimited
};

// returns the --source option so the caller can tell "given" from "default"
CLI::Option* add_rank_flags(CLI::App* cmd, RankOptions& opt) {
  cmd->add_option("--graph", opt.graph.path, "edge-list file")->required();
  cmd->add_flag("--natural-walk", opt.graph.natural_walk,
                "weight arcs by inverse outdegree");
  cmd->add_flag("--normalize", opt.graph.normalize,
                "rescale to matrix l1 norm 1, print the scale");
  cmd->add_option("--alpha", opt.alpha, "damping factor in [0,1)");
  cmd->add_option("--eps", opt.epsilon, "error tolerance");
  auto* src = cmd->add_option("--source", opt.source_value,
                              "preference chi_x on this node");
  cmd->add_option("--pref", opt.pref.pref_file,
                  "preference TSV file or \"uniform\"");
  cmd->add_option("--queue", opt.queue, "priority | fifo")
      ->check(CLI::IsMember({"priority", "fifo"}));
  cmd->add_option("--criterion", opt.criterion, "rel | abs")
      ->check(CLI::IsMember({"rel", "abs"}));
  cmd->add_option("--hubs", opt.hubs_file, "hub ranking file");
  cmd->add_option("--patch-u", opt.patch_u,
                  "dangling patch distribution (file or \"uniform\")");
  cmd->add_option("--patch-s", opt.patch_s, "precomputed patch ranking file");
  cmd->add_flag("--self-hub", opt.self_hub,
                "use the source as its own hub after the first push");
  cmd->add_flag("--stats", opt.stats, "print run statistics to stderr");
  cmd->add_option("--max-pushes", opt.max_pushes,
                  "push budget; 0 = unlimited (default: 10n)")
      ->check(CLI::Range(0LL, std::numeric_limits<long long>::max()));
  return src;
}

// returns an exit code != 0 with a message when the combination is invalid
int validate_rank_flags(const RankOptions& opt, bool has_source) {
  const bool has_pref = !opt.pref.pref_file.empty();
  if (has_source == has_pref) {
    std::cerr << "error: exactly one of --source and --pref is required\n";
    return kExitUsage;
  }
  if (opt.patch_u.empty() != opt.patch_s.empty()) {
    std::cerr << "error: --patch-u and --patch-s must be given together\n";
    return kExitUsage;
  }
  const bool patching = !opt.patch_u.empty();
  if (opt.self_hub && (patching || !opt.hubs_file.empty())) {
    std::cerr << "error: --self-hub cannot be combined with hub or patch "
                 "vectors\n";
    return kExitUsage;
  }
  if (opt.self_hub && !has_source) {
    std::cerr << "error: --self-hub requires --source\n";
    return kExitUsage;
  }
  if (patching && !opt.hubs_file.empty()) {
    std::cerr << "error: --hubs cannot be combined with --patch-u\n";
    return kExitUsage;
  }
  return kExitOk;
}

EngineConfig make_config(const RankOptions& opt, NodeId n) {
  EngineConfig cfg;
  cfg.alpha = opt.alpha;
  cfg.epsilon = opt.epsilon;
  cfg.criterion = opt.criterion == "rel" ? Criterion::RelativeResidual
                                         : Criterion::AbsoluteResidual;
  cfg.queue =
      opt.queue == "priority" ? QueueKind::Priority : QueueKind::Fifo;
  if (opt.max_pushes < 0)
    cfg.max_pushes = 10 * static_cast<std::uint64_t>(n);  // safety rail
  else if (opt.max_pushes > 0)
    cfg.max_pushes = static_cast<std::uint64_t>(opt.max_pushes);
  return cfg;
}

RankResult execute_rank(const RankOptions& opt, const WeightedGraph& g,
                        const std::string& digest) {
  const NodeId n = g.node_count();
  const EngineConfig cfg = make_config(opt, n);
  if (opt.self_hub) return self_hub_run(g, *opt.pref.source, cfg);
  const SparseVector v = resolve_preference(opt.pref, n);
  if (!opt.hubs_file.empty()) {
    std::istringstream in(read_file(opt.hubs_file));
    const HubSet hubs = read_hub_file(in, opt.alpha, digest);
    return run_with_hubs(g, v, cfg, hubs);
  }
  if (!opt.patch_u.empty()) {
    const SparseVector u = load_preference_file(opt.patch_u, n);
    std::istringstream in(read_file(opt.patch_s));
    SparseVector s = read_patch_file(in, opt.alpha, digest);
    return run_with_patch(g, v, u, cfg, std::move(s));
  }
  return run_push(g, v, cfg);
}

int cmd_rank(const RankOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const WeightedGraph g = load_graph(opt.graph);
  const std::string digest = graph_digest(g);
  const RankResult res = execute_rank(opt, g, digest);
  write_ranking(std::cout, res.p);
  const std::chrono::duration<double> wall =
      std::chrono::steady_clock::now() - start;
  if (opt.stats) write_stats(res, make_config(opt, g.node_count()), digest,
                             wall.count());
  if (res.truncated) {
    std::cerr << "warning: max pushes exhausted; partial result with "
                 "absolute bound "
              << format_double(res.absolute_bound) << '\n';
    return kExitTruncated;
  }
  return kExitOk;
}

int cmd_compare(const RankOptions& opt) {
  const WeightedGraph g = load_graph(opt.graph);
  const NodeId n = g.node_count();
  const std::string digest = graph_digest(g);
  const RankResult res = execute_rank(opt, g, digest);

  oracle::DenseVector exact;
  const SparseVector v = resolve_preference(opt.pref, n);
  if (!opt.patch_u.empty()) {
    const SparseVector u = load_preference_file(opt.patch_u, n);
    exact = oracle::dense_rank_patched(g, oracle::to_dense(u, n),
                                       oracle::to_dense(v, n), opt.alpha);
  } else {
    exact = oracle::dense_rank(g, oracle::to_dense(v, n), opt.alpha);
  }
  const auto approx = oracle::to_dense(res.p, n);
  double distance = 0.0;
  for (NodeId i = 0; i < n; ++i) distance += std::abs(exact[i] - approx[i]);

  const bool pass = distance <= res.absolute_bound + 1e-12;
  std::cout << "l1 distance: " << format_double(distance) << '\n'
            << "claimed bound: " << format_double(res.absolute_bound) << '\n'
            << (pass ? "PASS" : "FAIL") << '\n';
  if (!pass) return kExitError;
  if (res.truncated) {
    std::cerr << "warning: max pushes exhausted; bound checked on the "
                 "partial result\n";
    return kExitTruncated;
  }
  return kExitOk;
}

struct OracleOptions {
  GraphOptions graph;
  double alpha = 0.85;
  PreferenceChoice pref;
  std::string patch_u;
};

int cmd_oracle(const OracleOptions& opt, bool has_source) {
  const bool has_pref = !opt.pref.pref_file.empty();
  if (has_source == has_pref) {
    std::cerr << "error: exactly one of --source and --pref is required\n";
    return kExitUsage;
  }
  const WeightedGraph g = load_graph(opt.graph);
  const NodeId n = g.node_count();
  const SparseVector v = resolve_preference(opt.pref, n);
  oracle::DenseVector dense;
  if (!opt.patch_u.empty()) {
    const SparseVector u = load_preference_file(opt.patch_u, n);
    dense = oracle::dense_rank_patched(g, oracle::to_dense(u, n),
                                       oracle::to_dense(v, n), opt.alpha);
  } else {
    dense = oracle::dense_rank(g, oracle::to_dense(v, n), opt.alpha);
  }
  write_ranking(std::cout, oracle::to_sparse(dense));
  return kExitOk;
}

struct HubPrecomputeOptions {
  GraphOptions graph;
  double alpha = 0.85;
  std::vector<NodeId> nodes;
  std::string out;
  unsigned jobs = 1;
};

int cmd_hubs_precompute(const HubPrecomputeOptions& opt) {
  const WeightedGraph g = load_graph(opt.graph);
  const std::string digest = graph_digest(g);
  const oracle::DenseRanker ranker(g, opt.alpha);

  std::vector<NodeId> nodes = opt.nodes;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (const NodeId x : nodes)
    if (x >= g.node_count())
      throw std::runtime_error("hub node " + std::to_string(x) +
                               " out of range");

  // independent single-source solves; --jobs fans them out
  std::vector<SparseVector> rankings(nodes.size());
  const unsigned jobs =
      std::max(1u, std::min<unsigned>(opt.jobs, nodes.size()));
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= nodes.size()) return;
      rankings[i] = ranker.rank(SparseVector::indicator(nodes[i]));
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  HubSet hubs;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    hubs.insert(nodes[i], std::move(rankings[i]));

  std::ofstream out(opt.out);
  if (!out) throw std::runtime_error("cannot open " + opt.out);
  write_hub_file(out, hubs, opt.alpha, digest);
  return kExitOk;
}

struct PatchPrecomputeOptions {
  GraphOptions graph;
  double alpha = 0.85;
  std::string u = "uniform";
  std::string out;
};

int cmd_patch_precompute(const PatchPrecomputeOptions& opt) {
  const WeightedGraph g = load_graph(opt.graph);
  const NodeId n = g.node_count();
  const std::string digest = graph_digest(g);
  const SparseVector u = load_preference_file(opt.u, n);
  // s: ranking of the patched matrix with preference u
  const auto dense = oracle::dense_rank_patched(
      g, oracle::to_dense(u, n), oracle::to_dense(u, n), opt.alpha);
  std::ofstream out(opt.out);
  if (!out) throw std::runtime_error("cannot open " + opt.out);
  write_patch_file(out, oracle::to_sparse(dense), opt.alpha, digest);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral rankings of substochastic matrices via the push "
               "algorithm"};
  app.require_subcommand(1);

  RankOptions rank_opt;
  auto* rank_cmd =
      app.add_subcommand("rank", "approximate ranking via pushes");
  auto* rank_src = add_rank_flags(rank_cmd, rank_opt);

  RankOptions cmp_opt;
  auto* cmp_cmd = app.add_subcommand(
      "compare", "run push and oracle, check the error bound");
  auto* cmp_src = add_rank_flags(cmp_cmd, cmp_opt);

  OracleOptions oracle_opt;
  NodeId oracle_source = 0;
  auto* oracle_cmd =
      app.add_subcommand("oracle", "dense reference ranking (small n)");
  oracle_cmd->add_option("--graph", oracle_opt.graph.path, "edge-list file")
      ->required();
  oracle_cmd->add_flag("--natural-walk", oracle_opt.graph.natural_walk, "");
  oracle_cmd->add_flag("--normalize", oracle_opt.graph.normalize, "");
  oracle_cmd->add_option("--alpha", oracle_opt.alpha, "");
  auto* oracle_src = oracle_cmd->add_option("--source", oracle_source, "");
  oracle_cmd->add_option("--pref", oracle_opt.pref.pref_file, "");
  oracle_cmd->add_option("--patch-u", oracle_opt.patch_u, "");

  auto* hubs_cmd = app.add_subcommand("hubs", "hub vector tooling");
  hubs_cmd->require_subcommand(1);
  HubPrecomputeOptions hub_opt;
  auto* hubs_pre =
      hubs_cmd->add_subcommand("precompute", "solve hub rankings exactly");
  hubs_pre->add_option("--graph", hub_opt.graph.path, "")->required();
  hubs_pre->add_flag("--natural-walk", hub_opt.graph.natural_walk, "");
  hubs_pre->add_flag("--normalize", hub_opt.graph.normalize, "");
  hubs_pre->add_option("--alpha", hub_opt.alpha, "");
  hubs_pre->add_option("--nodes", hub_opt.nodes, "comma-separated hub nodes")
      ->required()
      ->delimiter(',');
  hubs_pre->add_option("--out", hub_opt.out, "output hub file")->required();
  hubs_pre->add_option("--jobs", hub_opt.jobs, "parallel solves");

  auto* patch_cmd = app.add_subcommand("patch", "patch vector tooling");
  patch_cmd->require_subcommand(1);
  PatchPrecomputeOptions patch_opt;
  auto* patch_pre =
      patch_cmd->add_subcommand("precompute", "solve the patched ranking");
  patch_pre->add_option("--graph", patch_opt.graph.path, "")->required();
  patch_pre->add_flag("--natural-walk", patch_opt.graph.natural_walk, "");
  patch_pre->add_flag("--normalize", patch_opt.graph.normalize, "");
  patch_pre->add_option("--alpha", patch_opt.alpha, "");
  patch_pre->add_option("--u", patch_opt.u, "patch distribution");
  patch_pre->add_option("--out", patch_opt.out, "output patch file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (rank_cmd->parsed()) {
      if (rank_src->count() > 0) rank_opt.pref.source = rank_opt.source_value;
      const int bad = validate_rank_flags(rank_opt, rank_src->count() > 0);
      return bad != kExitOk ? bad : cmd_rank(rank_opt);
    }
    if (cmp_cmd->parsed()) {
      if (cmp_src->count() > 0) cmp_opt.pref.source = cmp_opt.source_value;
      const int bad = validate_rank_flags(cmp_opt, cmp_src->count() > 0);
      return bad != kExitOk ? bad : cmd_compare(cmp_opt);
    }
    if (oracle_cmd->parsed()) {
      if (oracle_src->count() > 0) oracle_opt.pref.source = oracle_source;
      return cmd_oracle(oracle_opt, oracle_src->count() > 0);
    }
    if (hubs_cmd->parsed()) return cmd_hubs_precompute(hub_opt);
    if (patch_cmd->parsed()) return cmd_patch_precompute(patch_opt);
    return kExitUsage;
  } catch (const oracle::SizeGuardError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOracleGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
