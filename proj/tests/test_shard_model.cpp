#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sgu/error.hpp"
#include "sgu/shard_model.hpp"

namespace sgu {
namespace {

using oracle::make_graph;

/// Standardized design matrix of a trained model, rebuilt from its public fields.
LogisticObjective objective_of(const ShardModel& m, double l2) {
  std::vector<double> x;
  std::vector<int> y;
  for (const Edge& e : m.train_edges) {
    const auto f = model_features(m, e.u, e.v);
    for (std::size_t c = 0; c < f.size(); ++c) x.push_back((f[c] - m.feature_mean[c]) * m.feature_scale[c]);
    y.push_back(e.sign == Sign::kPositive ? 1 : 0);
  }
  return LogisticObjective(std::move(x), std::move(y), feature_count(m.d), l2);
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int shard = 0; shard < 5; ++shard) {
    const SignedGraph g = oracle::random_graph(25 + 5 * shard, 0.25, 0.35, rng);
    ModelHyperparams hp;
    hp.embed_dim = 4;
    hp.epochs = 5;
    hp.seed = shard;
    const ShardModel m = train_shard(g, {}, hp);
    const LogisticObjective obj = objective_of(m, 1e-2);
    for (int point = 0; point < 20; ++point) {
      std::vector<double> theta(obj.dim() + 1), grad(obj.dim() + 1), fd(obj.dim() + 1);
      for (double& t : theta) t = u(rng);
      obj.gradient(theta, grad);
      const double h = 1e-5;
      for (std::size_t j = 0; j < theta.size(); ++j) {
        auto plus = theta, minus = theta;
        plus[j] += h;
        minus[j] -= h;
        fd[j] = (obj.loss(plus) - obj.loss(minus)) / (2 * h);
      }
      EXPECT_LE(relative_error(grad, fd), 1e-4) << "shard " << shard << " point " << point;
    }
  }
}

TEST(Objective, ClassWeights) {
  const LogisticObjective obj({0, 0, 0, 0}, {1, 1, 1, 0}, 1, 0.0);
  EXPECT_DOUBLE_EQ(obj.sample_weights()[0], 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(obj.sample_weights()[3], 2.0);
  const LogisticObjective single({0, 0}, {1, 1}, 1, 0.0);
  EXPECT_EQ(single.sample_weights()[0], 1.0);
  // At theta = 0 every sample costs log 2 and the weights average to one.
  const std::vector<double> zero(2, 0.0);
  EXPECT_NEAR(obj.loss(zero), std::log(2.0), 1e-15);
}

TEST(Features, Examples) {
  const SignedGraph g = make_graph(2, {{0, 1, 1}});
  const Embedding emb = spectral_embed(g, 1, 1);
  const auto f = edge_features(emb, g, 0, 1);
  ASSERT_EQ(f.size(), 6u);
  EXPECT_NEAR(f[0], 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(f[2], 0.5);  // d+(0) / (1 + max degree)
  EXPECT_DOUBLE_EQ(f[3], 0.0);
  const Embedding zero{2, std::vector<double>(4, 0.0)};
  const auto z = edge_features(zero, g, 0, 1);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(z[i], 0.0);
  // Swapping endpoints swaps the degree blocks only.
  const SignedGraph path = make_graph(3, {{0, 1, 1}, {1, 2, -1}});
  const Embedding pe = spectral_embed(path, 2, 1);
  const auto ab = edge_features(pe, path, 0, 1), ba = edge_features(pe, path, 1, 0);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(ab[i], ba[i]);
  EXPECT_EQ(ab[4], ba[6]);
  EXPECT_EQ(ab[5], ba[7]);
}

TEST(Train, ToyLossDecreases) {
  const SignedGraph path = make_graph(3, {{0, 1, 1}, {1, 2, -1}});
  ModelHyperparams hp;
  hp.embed_dim = 2;
  const ShardModel m = train_shard(path, {}, hp);
  ASSERT_EQ(m.loss_trace.size(), hp.epochs + 1);
  for (std::size_t i = 1; i <= 10; ++i) EXPECT_LT(m.loss_trace[i], m.loss_trace[i - 1]);
  for (std::size_t i = 1; i < m.loss_trace.size(); ++i) EXPECT_LE(m.loss_trace[i], m.loss_trace[i - 1]);
  EXPECT_GT(predict(m, 0, 1), 0.5);
  EXPECT_LT(predict(m, 1, 2), 0.5);
}

TEST(Train, AllPositiveShard) {
  std::mt19937_64 rng(3);
  const SignedGraph g = oracle::random_graph(20, 0.3, 0.0, rng);
  const ShardModel m = train_shard(g, {}, ModelHyperparams{});
  for (const Edge& e : g.edges()) EXPECT_GE(predict(m, e.u, e.v), 0.5);
}

TEST(Train, EmptyShardIsPriorOnly) {
  const ShardModel m = train_shard(make_graph(3, {}), std::vector<NodeId>{4, 8, 9}, ModelHyperparams{});
  EXPECT_TRUE(m.prior_only);
  EXPECT_EQ(m.prior, 0.5);
  EXPECT_EQ(predict(m, 4, 8), 0.5);
}

TEST(Predict, ContractAndDeterminism) {
  std::mt19937_64 rng(9);
  const SignedGraph g = oracle::random_graph(30, 0.2, 0.4, rng);
  std::vector<NodeId> ids;
  for (NodeId u = 0; u < 30; ++u) ids.push_back(2 * u + 1);
  ModelHyperparams hp;
  hp.seed = 5;
  const ShardModel m = train_shard(g, ids, hp);
  EXPECT_EQ(train_shard(g, ids, hp), m);
  EXPECT_EQ(train_shard(g, ids, hp).loss_trace, m.loss_trace);
  EXPECT_EQ(predict(m, 0, 3), m.prior);  // node 0 is not in the shard
  EXPECT_EQ(predict(m, 3, 200), m.prior);
  std::size_t pos = 0;
  for (const Edge& e : g.edges()) pos += e.sign == Sign::kPositive;
  EXPECT_DOUBLE_EQ(m.prior, (pos + 1.0) / (g.edge_count() + 2.0));
  for (NodeId a = 0; a < 30; ++a)
    for (NodeId b = 0; b < 30; ++b) {
      const double p = predict(m, ids[a], ids[b]);
      EXPECT_GT(p, 0.0);
      EXPECT_LT(p, 1.0);
      EXPECT_EQ(p, predict(m, ids[b], ids[a]));
    }
  ShardModel zero = m;
  std::fill(zero.weights.begin(), zero.weights.end(), 0.0);
  zero.bias = 0.0;
  EXPECT_EQ(predict(zero, ids[0], ids[1]), 0.5);
  for (double w : m.weights) EXPECT_TRUE(std::isfinite(w));
}

TEST(Sigmoid, StaysInsideUnitInterval) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_GT(sigmoid(-1e6), 0.0);
  EXPECT_LT(sigmoid(1e6), 1.0);
}

TEST(Hyperparams, Validation) {
  ModelHyperparams hp;
  hp.embed_dim = 0;
  EXPECT_THROW(hp.validate(), InvalidParamsError);
  hp = {};
  hp.learning_rate = 0.0;
  EXPECT_THROW(hp.validate(), InvalidParamsError);
  hp = {};
  hp.epochs = 0;
  EXPECT_THROW(hp.validate(), InvalidParamsError);
  hp = {};
  hp.l2 = -1;
  EXPECT_THROW(hp.validate(), InvalidParamsError);
}

}  // namespace
}  // namespace sgu
