#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "sgu/shard_model.hpp"
#include "sgu/spectral.hpp"

namespace sgu {
namespace {

using oracle::make_graph;

Eigen::VectorXd dense_spectrum(const SignedGraph& g) {
  const auto a = oracle::dense(g);
  Eigen::MatrixXd m(g.node_count(), g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i)
    for (std::size_t j = 0; j < g.node_count(); ++j) m(i, j) = a[i][j];
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
}

TEST(PowerIteration, ClosedFormPairs) {
  const auto nodes = oracle::all_nodes(2);
  const double r = 1.0 / std::sqrt(2.0);
  auto pos = signed_power_iteration(make_graph(2, {{0, 1, 1}}), nodes, 1e-12, 1000, 1);
  EXPECT_TRUE(pos.has_structure);
  EXPECT_NEAR(pos.lambda, 1.0, 1e-12);
  EXPECT_NEAR(pos.x[0], r, 1e-9);
  EXPECT_NEAR(pos.x[1], r, 1e-9);
  auto neg = signed_power_iteration(make_graph(2, {{0, 1, -1}}), nodes, 1e-12, 1000, 1);
  EXPECT_NEAR(neg.lambda, 1.0, 1e-12);
  EXPECT_NEAR(neg.x[0], r, 1e-9);
  EXPECT_NEAR(neg.x[1], -r, 1e-9);
}

TEST(PowerIteration, EdgelessSubsetHasNoStructure) {
  const auto res = signed_power_iteration(make_graph(4, {{0, 3, 1}}), std::vector<NodeId>{0, 1, 2}, 1e-8, 100, 1);
  EXPECT_FALSE(res.has_structure);
  EXPECT_EQ(res.lambda, 0.0);
}

TEST(PowerIteration, MatchesDenseEigensolver) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 19;
    const SignedGraph g = oracle::random_graph(n, 0.4, 0.4, rng);
    if (g.edge_count() == 0) continue;
    const auto res = signed_power_iteration(g, oracle::all_nodes(n), 1e-14, 200000, trial, true);
    const Eigen::VectorXd ev = dense_spectrum(g);
    EXPECT_NEAR(res.lambda, ev.maxCoeff(), 1e-6) << "n=" << n;
    double norm = 0.0;
    for (double v : res.x) norm += v * v;
    EXPECT_NEAR(norm, 1.0, 1e-12);
    for (std::size_t i = 1; i < res.rayleigh_trace.size(); ++i) {
      EXPECT_GE(res.rayleigh_trace[i], res.rayleigh_trace[i - 1] - 1e-12);
    }
  }
}

TEST(PowerIteration, Deterministic) {
  std::mt19937_64 rng(4);
  const SignedGraph g = oracle::random_graph(40, 0.2, 0.3, rng);
  const auto a = signed_power_iteration(g, oracle::all_nodes(40), 1e-10, 1000, 9);
  const auto b = signed_power_iteration(g, oracle::all_nodes(40), 1e-10, 1000, 9);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.lambda, b.lambda);
}

TEST(Jacobi, MatchesEigen) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (std::size_t n : {1u, 2u, 5u, 12u}) {
    std::vector<double> a(n * n);
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = a[i * n + j] = a[j * n + i] = z(rng);
    std::vector<double> vectors;
    std::vector<double> values = symmetric_eigen(a, n, vectors);
    std::sort(values.begin(), values.end());
    const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(values[i], ref(i), 1e-10);
  }
}

TEST(Embedding, ClosedForm) {
  const double r = 1.0 / std::sqrt(2.0);
  const Embedding pos = spectral_embed(make_graph(2, {{0, 1, 1}}), 1, 3);
  EXPECT_NEAR(pos.row(0)[0], r, 1e-9);
  EXPECT_NEAR(pos.row(1)[0], r, 1e-9);
  const Embedding neg = spectral_embed(make_graph(2, {{0, 1, -1}}), 1, 3);
  EXPECT_NEAR(neg.row(0)[0], r, 1e-9);
  EXPECT_NEAR(neg.row(1)[0], -r, 1e-9);
  const Embedding none = spectral_embed(make_graph(3, {}), 2, 3);
  for (double v : none.values) EXPECT_EQ(v, 0.0);
}

// Top-|lambda| eigenvalues, orthonormal columns, zero rows for isolated nodes.
TEST(Embedding, TopMagnitudeBasis) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + rng() % 30;
    const SignedGraph g = oracle::random_graph(n, 0.25, 0.4, rng);
    const std::size_t d = 1 + rng() % 6;
    const EigenBasis b = top_eigenvectors_by_magnitude(g, d, trial);
    Eigen::VectorXd ev = dense_spectrum(g).cwiseAbs();
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
    for (std::size_t j = 0; j < d; ++j) {
      double norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) norm += b.at(i, j) * b.at(i, j);
      if (norm == 0.0) {
        EXPECT_LT(j < static_cast<std::size_t>(ev.size()) ? ev(j) : 0.0, 1e-6);
        continue;
      }
      EXPECT_NEAR(norm, 1.0, 1e-6);
      EXPECT_NEAR(std::abs(b.values[j]), ev(j), 1e-6);
      for (std::size_t k = j + 1; k < d; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += b.at(i, j) * b.at(i, k);
        EXPECT_LE(std::abs(dot), 1e-6);
      }
    }
    for (NodeId u = 0; u < n; ++u) {
      if (g.degree(u) > 0) continue;
      for (std::size_t j = 0; j < d; ++j) EXPECT_EQ(b.at(u, j), 0.0);
    }
  }
}

}  // namespace
}  // namespace sgu
