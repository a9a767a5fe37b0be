#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "sgu/error.hpp"
#include "sgu/signed_graph.hpp"

namespace sgu {
namespace {

using oracle::make_graph;

LoadedGraph read(const std::string& text, EdgeFormat f) {
  std::istringstream in(text);
  return read_edge_list(in, f);
}

TEST(Ingestion, RawRatingsSumToNegative) {
  const LoadedGraph lg = read("1,2,8,100\n2,1,-10,200\n", EdgeFormat::kRawRating);
  ASSERT_EQ(lg.graph.node_count(), 2u);
  ASSERT_EQ(lg.graph.edge_count(), 1u);
  EXPECT_EQ(lg.graph.edges()[0], (Edge{0, 1, Sign::kNegative}));
  EXPECT_EQ(lg.original_ids, (std::vector<std::int64_t>{1, 2}));
}

TEST(Ingestion, SignedSingleEdge) {
  const LoadedGraph lg = read("5,9,+1\n", EdgeFormat::kSigned);
  EXPECT_EQ(lg.graph.node_count(), 2u);
  EXPECT_EQ(lg.graph.positive_edge_count(), 1u);
  EXPECT_EQ(lg.graph.negative_edge_count(), 0u);
}

TEST(Ingestion, SelfLoopDropped) {
  const LoadedGraph lg = read("1,1,+1\n", EdgeFormat::kSigned);
  EXPECT_EQ(lg.graph.node_count(), 1u);
  EXPECT_EQ(lg.graph.edge_count(), 0u);
}

TEST(Ingestion, HeaderSkipped) {
  const LoadedGraph lg = read("source,target,rating,time\n3,4,2,0\n", EdgeFormat::kRawRating);
  EXPECT_EQ(lg.graph.edge_count(), 1u);
}

TEST(Ingestion, Errors) {
  EXPECT_THROW(read("", EdgeFormat::kSigned), EmptyGraphError);
  EXPECT_THROW(read("1,2,0\n", EdgeFormat::kRawRating), InvalidSignError);
  EXPECT_THROW(read("1,2,3\n", EdgeFormat::kSigned), InvalidSignError);
  try {
    read("1,2,1\n1,x,1\n", EdgeFormat::kSigned);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(read("1,2\n", EdgeFormat::kSigned), ParseError);
  EXPECT_THROW(load_edge_list("/nonexistent/graph.csv", EdgeFormat::kSigned), IoError);
}

TEST(Canonicalize, Rules) {
  const std::vector<DirectedObservation> agree{{0, 1, 1}, {1, 0, 1}};
  EXPECT_EQ(canonicalize(2, agree).positive_edge_count(), 1u);
  const std::vector<DirectedObservation> conflict{{0, 1, 1}, {1, 0, -1}};
  EXPECT_EQ(canonicalize(2, conflict).edge_count(), 0u);
  const std::vector<DirectedObservation> raw{{0, 1, 3}, {1, 0, -10}};
  EXPECT_EQ(canonicalize(2, raw).negative_edge_count(), 1u);
}

TEST(Canonicalize, Idempotent) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<NodeId> node(0, 14);
  std::uniform_int_distribution<int> val(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DirectedObservation> obs;
    for (int i = 0; i < 60; ++i) obs.push_back({node(rng), node(rng), static_cast<double>(val(rng))});
    const SignedGraph once = canonicalize(15, obs);
    std::vector<DirectedObservation> again;
    for (const Edge& e : once.edges()) again.push_back({e.u, e.v, static_cast<double>(to_int(e.sign))});
    EXPECT_EQ(canonicalize(15, again), once);
  }
}

TEST(Graph, RejectsInvalidEdges) {
  EXPECT_THROW(make_graph(2, {{0, 0, 1}}), InvalidParamsError);
  EXPECT_THROW(make_graph(2, {{0, 2, 1}}), InvalidParamsError);
  EXPECT_THROW(make_graph(3, {{0, 1, 1}, {1, 0, -1}}), InvalidParamsError);
}

TEST(Graph, CsvDumpIsCanonical) {
  const SignedGraph g = make_graph(4, {{3, 1, -1}, {0, 2, 1}, {0, 1, 1}});
  std::ostringstream out;
  write_graph_csv(out, g);
  EXPECT_EQ(out.str(), "0,1,+1\n0,2,+1\n1,3,-1\n");
  std::ostringstream map;
  const std::vector<std::int64_t> ids{10, 42};
  write_node_mapping_csv(map, ids);
  EXPECT_EQ(map.str(), "10,0\n42,1\n");
}

TEST(Triads, Examples) {
  EXPECT_EQ(triad_census(make_graph(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}})), (TriadCensus{1, 0, 0, 0}));
  const SignedGraph two_neg = make_graph(3, {{0, 1, 1}, {1, 2, -1}, {0, 2, -1}});
  EXPECT_EQ(triad_census(two_neg), (TriadCensus{0, 0, 1, 0}));
  EXPECT_EQ(balance_ratio(two_neg, oracle::all_nodes(3)), 1.0);
  const SignedGraph one_neg = make_graph(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, -1}});
  EXPECT_EQ(balance_ratio(one_neg, oracle::all_nodes(3)), 0.0);
  const SignedGraph k4 = make_graph(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}});
  EXPECT_EQ(triad_census(k4), (TriadCensus{4, 0, 0, 0}));
  EXPECT_EQ(balance_ratio(make_graph(2, {}), oracle::all_nodes(2)), 1.0);
  EXPECT_EQ(triad_census(k4, std::vector<NodeId>{}), TriadCensus{});
}

TEST(Triads, FlippingOneEdgeMakesTriangleUnbalanced) {
  const SignedGraph pos = make_graph(4, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {2, 3, 1}});
  EXPECT_EQ(balance_ratio(triad_census(pos)), 1.0);
  const SignedGraph flipped = make_graph(4, {{0, 1, -1}, {1, 2, 1}, {0, 2, 1}, {2, 3, 1}});
  EXPECT_EQ(triad_census(flipped), (TriadCensus{0, 1, 0, 0}));
}

// Random graphs and subsets against the dense triple loop.
TEST(Triads, MatchBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng() % 48;
    const SignedGraph g = oracle::random_graph(n, 0.1 + 0.6 * (rng() % 100) / 100.0, 0.4, rng);
    std::vector<NodeId> subset;
    for (NodeId u = 0; u < n; ++u) {
      if (rng() % 3) subset.push_back(u);
    }
    for (const auto& nodes : {oracle::all_nodes(n), subset}) {
      const auto t = oracle::triangles(g, nodes);
      const TriadCensus c = triad_census(g, nodes);
      EXPECT_EQ(c, (TriadCensus{t[0], t[1], t[2], t[3]}));
      EXPECT_EQ(balance_ratio(g, nodes), oracle::balance(t));
    }
  }
}

TEST(Subgraph, Properties) {
  const SignedGraph path = make_graph(3, {{0, 1, 1}, {1, 2, -1}});
  const InducedSubgraph ac = induced_subgraph(path, std::vector<NodeId>{0, 2});
  EXPECT_EQ(ac.graph.node_count(), 2u);
  EXPECT_EQ(ac.graph.edge_count(), 0u);
  EXPECT_EQ(ac.to_parent, (std::vector<NodeId>{0, 2}));
  EXPECT_EQ(induced_subgraph(path, oracle::all_nodes(3)).graph, path);
  EXPECT_EQ(induced_subgraph(path, std::vector<NodeId>{}).graph.node_count(), 0u);

  std::mt19937_64 rng(5);
  const SignedGraph g = oracle::random_graph(30, 0.3, 0.3, rng);
  std::vector<NodeId> grow;
  std::size_t last = 0;
  for (NodeId u : {7u, 3u, 29u, 0u, 12u, 13u, 14u, 1u, 2u}) {
    grow.push_back(u);
    const InducedSubgraph s = induced_subgraph(g, grow);
    EXPECT_GE(s.graph.edge_count(), last);
    last = s.graph.edge_count();
    for (const Edge& e : s.graph.edges()) {
      EXPECT_EQ(g.sign_of(s.to_parent[e.u], s.to_parent[e.v]), e.sign);
    }
  }
}

TEST(Ssbm, DegenerateBlocks) {
  SsbmParams p{4, 2, 1.0, 0.0, 0.0, 0.0, 1};
  const SignedGraph cliques = generate_polarized_ssbm(p);
  EXPECT_EQ(cliques.edge_count(), 2u);
  EXPECT_EQ(cliques.positive_edge_count(), 2u);
  EXPECT_TRUE(cliques.has_edge(0, 1));
  EXPECT_TRUE(cliques.has_edge(2, 3));
  p = {4, 2, 0.0, 0.0, 0.0, 1.0, 1};
  const SignedGraph bipartite = generate_polarized_ssbm(p);
  EXPECT_EQ(bipartite.negative_edge_count(), 4u);
  EXPECT_FALSE(bipartite.has_edge(0, 1));
}

TEST(Ssbm, DefaultCountsNearAnalyticMeans) {
  const SsbmParams p;
  const SignedGraph g = generate_polarized_ssbm(p);
  double in_pairs = 0, out_pairs = 0;
  std::size_t in_pos = 0, in_neg = 0, out_pos = 0, out_neg = 0;
  for (NodeId u = 0; u < p.n; ++u)
    for (NodeId v = u + 1; v < p.n; ++v) (ssbm_block_of(p, u) == ssbm_block_of(p, v) ? in_pairs : out_pairs) += 1;
  for (const Edge& e : g.edges()) {
    const bool same = ssbm_block_of(p, e.u) == ssbm_block_of(p, e.v);
    const bool pos = e.sign == Sign::kPositive;
    (same ? (pos ? in_pos : in_neg) : (pos ? out_pos : out_neg))++;
  }
  EXPECT_NEAR(in_pos, p.p_in_pos * in_pairs, 0.05 * p.p_in_pos * in_pairs);
  EXPECT_NEAR(in_neg, p.p_in_neg * in_pairs, 0.05 * p.p_in_neg * in_pairs);
  EXPECT_NEAR(out_pos, p.p_out_pos * out_pairs, 0.05 * p.p_out_pos * out_pairs);
  EXPECT_NEAR(out_neg, p.p_out_neg * out_pairs, 0.05 * p.p_out_neg * out_pairs);
  EXPECT_EQ(generate_polarized_ssbm(p), g);
}

TEST(Ssbm, InvalidParams) {
  EXPECT_THROW(generate_polarized_ssbm({3, 4, 0.1, 0, 0, 0, 1}), InvalidParamsError);
  EXPECT_THROW(generate_polarized_ssbm({10, 2, 1.5, 0, 0, 0, 1}), InvalidParamsError);
}

}  // namespace
}  // namespace sgu
