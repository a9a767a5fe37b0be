#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgu/signed_graph.hpp"

namespace sgu {

struct ModelHyperparams {
  std::size_t embed_dim = 16;
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  double l2 = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const ModelHyperparams&, const ModelHyperparams&) = default;
};

/// Per-node embedding table: rows are nodes of the graph it was computed on.
struct Embedding {
  std::size_t dim = 0;
  std::vector<double> values;  // row-major nodes x dim

  std::span<const double> row(std::size_t node) const {
    return {values.data() + node * dim, dim};
  }
};

/// Top-d eigenvectors of A+ - A- by |eigenvalue| as embedding columns.
Embedding spectral_embed(const SignedGraph& g, std::size_t d, std::uint64_t seed);

inline std::size_t feature_count(std::size_t d) { return 2 * d + 4; }

/// [z_u * z_v, z_u + z_v, d+(u), d-(u), d+(v), d-(v)] with degrees scaled by
/// 1 / (1 + max degree). Endpoints are taken in the order given; callers that
/// need orientation independence pass u < v.
std::vector<double> edge_features(const Embedding& emb, const SignedGraph& g, NodeId u, NodeId v);

/// Class-weighted, L2-regularized logistic loss over a fixed design matrix:
///   L(w, b) = (1/N) sum_i c_i * logloss(y_i, w.x_i + b) + (l2/2) |w|^2
/// with c_i = N / (2 * count(class of i)), or 1 when only one class occurs.
class LogisticObjective {
 public:
  LogisticObjective(std::vector<double> features, std::vector<int> labels, std::size_t dim, double l2);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  std::span<const double> sample_weights() const { return weights_; }

  /// theta = [w_0 .. w_{dim-1}, b].
  double loss(std::span<const double> theta) const;
  void gradient(std::span<const double> theta, std::span<double> grad) const;

 private:
  std::vector<double> x_;
  std::vector<int> labels_;  // 1 positive, 0 negative
  std::vector<double> weights_;
  std::size_t dim_;
  double l2_;
};

double sigmoid(double score);

/// Reference shard model: spectral embedding of the shard graph plus a
/// class-weighted logistic classifier on standardized edge features.
struct ShardModel {
  std::size_t d = 0;
  /// Parent-graph ids of the shard's nodes, ascending.
  std::vector<NodeId> nodes;
  Embedding embedding;
  std::vector<std::uint32_t> pos_degree;
  std::vector<std::uint32_t> neg_degree;
  double degree_scale = 1.0;
  /// Standardization applied before the linear layer.
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  std::vector<double> weights;
  double bias = 0.0;
  /// Add-one smoothed share of positive training edges.
  double prior = 0.5;
  /// True when the shard had no training edges; predictions are the prior.
  bool prior_only = false;
  /// Training edges in parent-graph ids.
  std::vector<Edge> train_edges;
  /// Loss after each epoch.
  std::vector<double> loss_trace;

  /// Local row of a parent id, or -1.
  std::int64_t local_index(NodeId parent) const;
  bool embeds(NodeId parent) const { return local_index(parent) >= 0; }

  friend bool operator==(const ShardModel& a, const ShardModel& b) {
    return a.d == b.d && a.nodes == b.nodes && a.embedding.values == b.embedding.values &&
           a.pos_degree == b.pos_degree && a.neg_degree == b.neg_degree &&
           a.degree_scale == b.degree_scale && a.feature_mean == b.feature_mean &&
           a.feature_scale == b.feature_scale && a.weights == b.weights && a.bias == b.bias &&
           a.prior == b.prior && a.prior_only == b.prior_only && a.train_edges == b.train_edges;
  }
};

/// Trains on every edge of the shard graph. `to_parent` maps local ids to the
/// ids stored in the model (identity when empty).
ShardModel train_shard(const SignedGraph& shard_graph, std::span<const NodeId> to_parent,
                       const ModelHyperparams& hp);
ShardModel train_shard(const InducedSubgraph& shard, const ModelHyperparams& hp);

/// Probability that the pair (u, v) (parent ids) is positive. Orientation
/// independent; returns the prior when either endpoint is outside the shard.
double predict(const ShardModel& m, NodeId u, NodeId v);

/// Raw (unstandardized) features of a pair of parent ids inside the model,
/// ordered so that the smaller id comes first.
std::vector<double> model_features(const ShardModel& m, NodeId u, NodeId v);

}  // namespace sgu
