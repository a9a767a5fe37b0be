#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "sgu/error.hpp"
#include "sgu/evaluation.hpp"

namespace sgu {
namespace {

SignedGraph ninety_ten() {
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 100; ++i) edges.push_back({i, i + 1, i < 90 ? Sign::kPositive : Sign::kNegative});
  return SignedGraph(101, std::move(edges));
}

TEST(Split, StratifiedCounts) {
  const EdgeSplit s = split_edges(ninety_ten(), {0.8, true, 3});
  EXPECT_EQ(s.train.positive_edge_count(), 72u);
  EXPECT_EQ(s.train.negative_edge_count(), 8u);
  EXPECT_EQ(s.test.size(), 20u);
  EXPECT_TRUE(s.warnings.empty());
  EXPECT_EQ(s.train.node_count(), 101u);
}

TEST(Split, PartitionOfEdgesAndDeterministic) {
  std::mt19937_64 rng(1);
  const SignedGraph g = oracle::random_graph(60, 0.2, 0.3, rng);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const EdgeSplit s = split_edges(g, {0.7, true, seed});
    std::vector<Edge> all(s.train.edges().begin(), s.train.edges().end());
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all, std::vector<Edge>(g.edges().begin(), g.edges().end()));
    EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
    const EdgeSplit t = split_edges(g, {0.7, true, seed});
    EXPECT_EQ(t.train, s.train);
    EXPECT_EQ(t.test, s.test);
  }
}

TEST(Split, DegradesWithWarning) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 10; ++i) edges.push_back({i, i + 1, i == 0 ? Sign::kNegative : Sign::kPositive});
  const EdgeSplit s = split_edges(SignedGraph(11, edges), {0.8, true, 1});
  EXPECT_EQ(s.warnings.size(), 1u);
  EXPECT_EQ(s.train.edge_count() + s.test.size(), 10u);
  EXPECT_THROW(split_edges(SignedGraph(11, edges), {1.0, true, 1}), InvalidParamsError);
}

TEST(MacroF1, Examples) {
  EXPECT_EQ(macro_f1(std::vector<double>{0.9, 0.1}, std::vector<int>{1, -1}).macro_f1, 1.0);
  const F1Report all_pos = macro_f1(std::vector<double>{0.9, 0.9, 0.9, 0.9}, std::vector<int>{1, 1, -1, -1});
  EXPECT_DOUBLE_EQ(*all_pos.f1_positive, 2.0 / 3.0);
  EXPECT_EQ(*all_pos.f1_negative, 0.0);
  EXPECT_DOUBLE_EQ(all_pos.macro_f1, 1.0 / 3.0);
  const F1Report single = macro_f1(std::vector<double>{0.8, 0.7}, std::vector<int>{1, 1});
  EXPECT_EQ(single.macro_f1, 1.0);
  EXPECT_FALSE(single.f1_negative);
  EXPECT_THROW(macro_f1(std::vector<double>{}, std::vector<int>{}), InvalidParamsError);
  EXPECT_THROW(macro_f1(std::vector<double>{0.5}, std::vector<int>{1, 1}), InvalidParamsError);
}

TEST(MacroF1, MatchesConfusionOracle) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 1000;
    const double bias = u(rng);
    std::vector<double> p(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = std::round(u(rng) * 20) / 20;  // ties at the threshold
      y[i] = u(rng) < bias ? 1 : -1;
    }
    const F1Report r = macro_f1(p, y);
    EXPECT_EQ(r.macro_f1, oracle::macro_f1(p, y));
    EXPECT_EQ(r.count(), n);
    std::size_t pos_labels = 0;
    for (int v : y) pos_labels += v == 1;
    EXPECT_EQ(r.tp + r.fn, pos_labels);
  }
}

TEST(MiaAuc, Examples) {
  EXPECT_EQ(mia_auc(std::vector<double>{0.9, 0.9}, std::vector<double>{0.6, 0.6, 0.6}), 1.0);
  EXPECT_EQ(mia_auc(std::vector<double>{0.7, 0.6}, std::vector<double>{0.6, 0.7}), 0.5);
  EXPECT_EQ(mia_auc(std::vector<double>{0.9, 0.7}, std::vector<double>{0.8, 0.6}), 0.75);
  EXPECT_THROW(mia_auc(std::vector<double>{}, std::vector<double>{0.5}), InvalidParamsError);
  EXPECT_EQ(attack_confidence(0.2), 0.8);
  EXPECT_EQ(attack_confidence(0.7), 0.7);
}

TEST(MiaAuc, MatchesPairwiseOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t a = 1 + rng() % 200, b = 1 + rng() % 200;
    const int levels = 2 + rng() % 50;
    std::vector<double> m(a), x(b);
    for (double& v : m) v = 0.5 + 0.5 * static_cast<double>(rng() % levels) / levels;
    for (double& v : x) v = 0.5 + 0.5 * static_cast<double>(rng() % levels) / levels;
    EXPECT_NEAR(mia_auc(m, x), oracle::auc(m, x), 1e-12);
    EXPECT_NEAR(mia_auc(m, x), 1.0 - mia_auc(x, m), 1e-12);
  }
}

TEST(Summary, SampleStd) {
  const MetricSummary s = summarize(std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(5.0 / 3.0));
  EXPECT_EQ(summarize(std::vector<double>{7}).stddev, 0.0);
  const std::string t = format_table({{"sgu", {{"macro_f1", s}}}});
  EXPECT_NE(t.find("2.5000 ± 1.2910"), std::string::npos);
  EXPECT_NE(t.find("macro_f1"), std::string::npos);
}

TEST(Benchmark, SmallRunIsExactAndDeterministic) {
  const SignedGraph g = generate_polarized_ssbm({200, 5, 0.3, 0.01, 0.01, 0.1, 2});
  BenchmarkConfig c;
  c.clustering.k = 5;
  c.model.embed_dim = 8;
  c.model.epochs = 40;
  c.deletion_fraction = 0.02;
  c.seed = 3;
  const UnlearnBenchmark b = run_unlearn_benchmark(g, c);
  EXPECT_EQ(b.deletions.size(), static_cast<std::size_t>(std::lround(0.02 * b.train_edges)));
  EXPECT_EQ(b.intra_deletions + b.cut_deletions, b.deletions.size());
  ASSERT_TRUE(b.exact);
  EXPECT_TRUE(*b.exact);
  EXPECT_EQ(b.f1_scratch->macro_f1, b.f1_after.macro_f1);
  EXPECT_EQ(b.train_edges + b.test_edges, g.edge_count());
  EXPECT_EQ(benchmark_to_json(run_unlearn_benchmark(g, c)).dump(), benchmark_to_json(b).dump());

  c.partitioner = PartitionerKind::kRandom;
  c.skip_scratch = true;
  const UnlearnBenchmark r = run_unlearn_benchmark(g, c);
  EXPECT_FALSE(r.exact);
  // Same split and deletion sample for both partitioners.
  EXPECT_EQ(r.train_edges, b.train_edges);
  for (std::size_t i = 0; i < r.deletions.size(); ++i) EXPECT_EQ(r.deletions[i].edge, b.deletions[i].edge);
}

TEST(Benchmark, TooFewDeletionsRejected) {
  const SignedGraph g = generate_polarized_ssbm({40, 2, 0.3, 0.0, 0.0, 0.1, 2});
  BenchmarkConfig c;
  c.clustering.k = 2;
  c.deletion_fraction = 1e-6;
  EXPECT_THROW(run_unlearn_benchmark(g, c), InvalidParamsError);
}

}  // namespace
}  // namespace sgu
