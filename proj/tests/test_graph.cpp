#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "pushrank/digest.hpp"
#include "pushrank/graph.hpp"

#include "test_util.hpp"

using namespace pushrank;
using testutil::graph_from_text;

TEST_CASE("parses a single unweighted arc") {
  const auto g = graph_from_text("0 1\n", false);
  REQUIRE(g.node_count() == 2);
  REQUIRE(g.arc_count() == 1);
  CHECK(g.out_arcs(0)[0].target == 1);
  CHECK(g.out_arcs(0)[0].weight == 1.0);
  CHECK(g.is_dangling(1));
}

TEST_CASE("parses weighted arcs including self-loops") {
  const auto g = graph_from_text("0 1 0.5\n0 0 0.5\n", true);
  REQUIRE(g.node_count() == 2);
  CHECK(g.row_sum(0) == 1.0);
  CHECK(g.row_sum(1) == 0.0);
}

TEST_CASE("skips comments and blank lines, accepts CRLF") {
  const auto g = graph_from_text("0 1 0.3\r\n# comment\n\n2 0 1.0\n", true);
  REQUIRE(g.node_count() == 3);
  REQUIRE(g.arc_count() == 2);
  CHECK(g.out_arcs(0)[0].weight == 0.3);
  CHECK(g.out_arcs(2)[0].target == 0);
  CHECK(g.is_dangling(1));
}

TEST_CASE("parse errors carry the line number") {
  std::istringstream in("0 1 0.5\n0 what 1.0\n");
  CHECK_THROWS_WITH(WeightedGraph::from_edge_list(in, true),
                    Catch::Matchers::ContainsSubstring("line 2"));

  std::istringstream missing("0 1\n");
  CHECK_THROWS_AS(WeightedGraph::from_edge_list(missing, true), EdgeListError);
}

TEST_CASE("rejects negative weights and duplicate arcs") {
  std::istringstream neg("0 1 -0.25\n");
  CHECK_THROWS_WITH(WeightedGraph::from_edge_list(neg, true),
                    Catch::Matchers::ContainsSubstring("negative"));

  std::istringstream dup("0 1 0.25\n0 1 0.5\n");
  CHECK_THROWS_WITH(WeightedGraph::from_edge_list(dup, true),
                    Catch::Matchers::ContainsSubstring("duplicate"));
}

TEST_CASE("zero-weight arcs are not stored") {
  const auto g = graph_from_text("0 1 0\n1 0 1\n", true);
  CHECK(g.out_degree(0) == 0);
  CHECK(g.out_degree(1) == 1);
}

TEST_CASE("natural walk weights arcs by inverse outdegree") {
  const auto g = natural_walk(graph_from_text("0 1\n0 2\n", false));
  CHECK(g.out_arcs(0)[0].weight == 0.5);
  CHECK(g.out_arcs(0)[1].weight == 0.5);

  const auto dangle = natural_walk(graph_from_text("0 1\n", false));
  CHECK(dangle.out_arcs(0)[0].weight == 1.0);
  CHECK(dangle.row_sum(1) == 0.0);

  // complete digraph on 3 nodes, no self-loops
  const auto k3 =
      natural_walk(graph_from_text("0 1\n0 2\n1 0\n1 2\n2 0\n2 1\n", false));
  for (NodeId x = 0; x < 3; ++x) {
    for (const Arc& a : k3.out_arcs(x)) CHECK(a.weight == 0.5);
    CHECK(k3.row_sum(x) == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("normalization scales by the inverse of the max row sum") {
  const auto one = normalize_unit_norm(graph_from_text("0 1 2.0\n", true));
  CHECK(one.scale == 0.5);
  CHECK(one.graph.out_arcs(0)[0].weight == 1.0);

  const auto same = normalize_unit_norm(graph_from_text("0 1 1.0\n", true));
  CHECK(same.scale == 1.0);
  CHECK(same.graph == graph_from_text("0 1 1.0\n", true));

  const auto multi =
      normalize_unit_norm(graph_from_text("0 1 1\n0 2 1\n1 0 1\n", true));
  CHECK(multi.scale == 0.5);
  CHECK(multi.graph.row_sum(0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(multi.graph.row_sum(1) == 0.5);
  CHECK(multi.graph.row_sum(2) == 0.0);
  for (NodeId x = 0; x < 3; ++x)
    for (const Arc& a : multi.graph.out_arcs(x)) CHECK(a.weight == 0.5);
}

TEST_CASE("normalizing an arc-free graph fails") {
  const auto g = graph_from_text("# nothing\n", true);
  CHECK_THROWS_AS(normalize_unit_norm(g), std::invalid_argument);
}

TEST_CASE("normalized random graphs satisfy the row-sum invariants") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const auto g = testutil::random_substochastic_graph(rng, 60, 5.0);
    CHECK(g.max_row_sum() == Catch::Approx(1.0).margin(1e-12));
    CHECK(g.is_substochastic());
    // natural walk of the same arcs: rows sum to 1 or are dangling
    const auto nat = natural_walk(g);
    for (NodeId x = 0; x < nat.node_count(); ++x) {
      if (nat.is_dangling(x))
        CHECK(nat.row_sum(x) == 0.0);
      else
        CHECK(nat.row_sum(x) == Catch::Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("arc iteration is sorted by target id") {
  const auto g = graph_from_text("0 5 0.1\n0 2 0.2\n0 9 0.3\n", true);
  const auto arcs = g.out_arcs(0);
  REQUIRE(arcs.size() == 3);
  CHECK(arcs[0].target == 2);
  CHECK(arcs[1].target == 5);
  CHECK(arcs[2].target == 9);
}

TEST_CASE("serialization round-trips random graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const auto g = testutil::random_substochastic_graph(rng, 50, 4.0);
    std::ostringstream out;
    g.serialize(out);
    std::istringstream in(out.str());
    const auto parsed = WeightedGraph::from_edge_list(in, true);
    CHECK(parsed == g);
    CHECK(graph_digest(parsed) == graph_digest(g));
  }
}

TEST_CASE("digest changes when the graph changes") {
  const auto a = graph_from_text("0 1 0.5\n", true);
  const auto b = graph_from_text("0 1 0.25\n", true);
  CHECK(graph_digest(a) != graph_digest(b));
  CHECK(graph_digest(a).size() == 64);
}
