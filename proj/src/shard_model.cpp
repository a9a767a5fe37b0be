#include "sgu/shard_model.hpp"

#include <algorithm>
#include <cmath>

#include "sgu/error.hpp"
#include "sgu/rng.hpp"
#include "sgu/spectral.hpp"

namespace sgu {

void ModelHyperparams::validate() const {
  if (embed_dim < 1) throw InvalidParamsError("model: embed_dim must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidParamsError("model: learning_rate must be > 0");
  if (epochs < 1) throw InvalidParamsError("model: epochs must be >= 1");
  if (!(l2 >= 0.0)) throw InvalidParamsError("model: l2 must be >= 0");
}

Embedding spectral_embed(const SignedGraph& g, std::size_t d, std::uint64_t seed) {
  if (d < 1) throw InvalidParamsError("spectral_embed: d must be >= 1");
  EigenBasis basis = top_eigenvectors_by_magnitude(g, d, seed);
  return Embedding{d, std::move(basis.vectors)};
}

std::vector<double> edge_features(const Embedding& emb, const SignedGraph& g, NodeId u, NodeId v) {
  if (u == v) throw InvalidParamsError("edge_features: endpoints must differ");
  const std::size_t d = emb.dim;
  std::vector<double> f(feature_count(d));
  auto zu = emb.row(u);
  auto zv = emb.row(v);
  for (std::size_t i = 0; i < d; ++i) {
    f[i] = zu[i] * zv[i];
    f[d + i] = zu[i] + zv[i];
  }
  const double scale = 1.0 / (1.0 + static_cast<double>(g.max_degree()));
  f[2 * d + 0] = static_cast<double>(g.positive_degree(u)) * scale;
  f[2 * d + 1] = static_cast<double>(g.negative_degree(u)) * scale;
  f[2 * d + 2] = static_cast<double>(g.positive_degree(v)) * scale;
  f[2 * d + 3] = static_cast<double>(g.negative_degree(v)) * scale;
  return f;
}

// ---------------------------------------------------------------------------

LogisticObjective::LogisticObjective(std::vector<double> features, std::vector<int> labels,
                                     std::size_t dim, double l2)
    : x_(std::move(features)), labels_(std::move(labels)), dim_(dim), l2_(l2) {
  if (x_.size() != labels_.size() * dim_) throw InvalidParamsError("objective: shape mismatch");
  std::size_t pos = 0;
  for (int y : labels_) pos += y == 1;
  const std::size_t neg = labels_.size() - pos;
  const double n = static_cast<double>(labels_.size());
  const double w_pos = neg == 0 ? 1.0 : n / (2.0 * static_cast<double>(pos));
  const double w_neg = pos == 0 ? 1.0 : n / (2.0 * static_cast<double>(neg));
  weights_.resize(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) weights_[i] = labels_[i] == 1 ? w_pos : w_neg;
}

namespace {

double softplus(double s) { return std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s))); }

}  // namespace

double sigmoid(double score) {
  // Clamped so the output stays strictly inside (0, 1).
  const double s = std::clamp(score, -30.0, 30.0);
  return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

double LogisticObjective::loss(std::span<const double> theta) const {
  const double b = theta[dim_];
  double total = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double* xi = x_.data() + i * dim_;
    double s = b;
    for (std::size_t j = 0; j < dim_; ++j) s += theta[j] * xi[j];
    total += weights_[i] * (softplus(s) - labels_[i] * s);
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) reg += theta[j] * theta[j];
  const double n = labels_.empty() ? 1.0 : static_cast<double>(labels_.size());
  return total / n + 0.5 * l2_ * reg;
}

void LogisticObjective::gradient(std::span<const double> theta, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  const double b = theta[dim_];
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double* xi = x_.data() + i * dim_;
    double s = b;
    for (std::size_t j = 0; j < dim_; ++j) s += theta[j] * xi[j];
    // Unclamped logistic here so the gradient matches the loss exactly.
    const double p = s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
    const double r = weights_[i] * (p - labels_[i]);
    for (std::size_t j = 0; j < dim_; ++j) grad[j] += r * xi[j];
    grad[dim_] += r;
  }
  const double n = labels_.empty() ? 1.0 : static_cast<double>(labels_.size());
  for (double& gj : grad) gj /= n;
  for (std::size_t j = 0; j < dim_; ++j) grad[j] += l2_ * theta[j];
}

// ---------------------------------------------------------------------------

std::int64_t ShardModel::local_index(NodeId parent) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), parent);
  if (it == nodes.end() || *it != parent) return -1;
  return it - nodes.begin();
}

namespace {

void raw_features_local(const ShardModel& m, std::size_t i, std::size_t j, double* out) {
  const std::size_t d = m.d;
  auto zi = m.embedding.row(i);
  auto zj = m.embedding.row(j);
  for (std::size_t c = 0; c < d; ++c) {
    out[c] = zi[c] * zj[c];
    out[d + c] = zi[c] + zj[c];
  }
  out[2 * d + 0] = m.pos_degree[i] * m.degree_scale;
  out[2 * d + 1] = m.neg_degree[i] * m.degree_scale;
  out[2 * d + 2] = m.pos_degree[j] * m.degree_scale;
  out[2 * d + 3] = m.neg_degree[j] * m.degree_scale;
}

}  // namespace

ShardModel train_shard(const SignedGraph& shard_graph, std::span<const NodeId> to_parent,
                       const ModelHyperparams& hp) {
  hp.validate();
  const std::size_t n = shard_graph.node_count();
  if (!to_parent.empty() && to_parent.size() != n) {
    throw InvalidParamsError("train_shard: id map size differs from node count");
  }
  for (std::size_t i = 1; i < to_parent.size(); ++i) {
    if (to_parent[i] <= to_parent[i - 1]) throw InvalidParamsError("train_shard: id map must ascend");
  }
  ShardModel m;
  m.d = hp.embed_dim;
  const std::size_t f = feature_count(m.d);
  m.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.nodes[i] = to_parent.empty() ? static_cast<NodeId>(i) : to_parent[i];
  }
  m.pos_degree.resize(n);
  m.neg_degree.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.pos_degree[i] = static_cast<std::uint32_t>(shard_graph.positive_degree(static_cast<NodeId>(i)));
    m.neg_degree[i] = static_cast<std::uint32_t>(shard_graph.negative_degree(static_cast<NodeId>(i)));
  }
  m.degree_scale = 1.0 / (1.0 + static_cast<double>(shard_graph.max_degree()));
  m.feature_mean.assign(f, 0.0);
  m.feature_scale.assign(f, 1.0);
  m.weights.assign(f, 0.0);
  for (const Edge& e : shard_graph.edges()) m.train_edges.push_back({m.nodes[e.u], m.nodes[e.v], e.sign});

  const std::size_t count = shard_graph.edge_count();
  const std::size_t pos = shard_graph.positive_edge_count();
  m.prior = (static_cast<double>(pos) + 1.0) / (static_cast<double>(count) + 2.0);
  if (count == 0) {
    m.embedding = Embedding{m.d, std::vector<double>(n * m.d, 0.0)};
    m.prior_only = true;
    return m;
  }

  m.embedding = spectral_embed(shard_graph, m.d, derive_seed(hp.seed, "embed"));

  std::vector<double> x(count * f);
  std::vector<int> y(count);
  for (std::size_t r = 0; r < count; ++r) {
    const Edge& e = shard_graph.edges()[r];
    raw_features_local(m, e.u, e.v, x.data() + r * f);
    y[r] = e.sign == Sign::kPositive ? 1 : 0;
  }
  for (std::size_t c = 0; c < f; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < count; ++r) mean += x[r * f + c];
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (std::size_t r = 0; r < count; ++r) var += (x[r * f + c] - mean) * (x[r * f + c] - mean);
    const double sd = std::sqrt(var / static_cast<double>(count));
    m.feature_mean[c] = mean;
    m.feature_scale[c] = sd > 1e-12 ? 1.0 / sd : 1.0;
    for (std::size_t r = 0; r < count; ++r) x[r * f + c] = (x[r * f + c] - mean) * m.feature_scale[c];
  }

  const LogisticObjective objective(std::move(x), std::move(y), f, hp.l2);
  std::vector<double> theta(f + 1, 0.0), grad(f + 1);
  Rng rng(derive_seed(hp.seed, "init"));
  for (std::size_t c = 0; c < f; ++c) theta[c] = rng.uniform(-0.01, 0.01);
  m.loss_trace.reserve(hp.epochs + 1);
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    m.loss_trace.push_back(objective.loss(theta));
    objective.gradient(theta, grad);
    for (std::size_t c = 0; c <= f; ++c) theta[c] -= hp.learning_rate * grad[c];
  }
  m.loss_trace.push_back(objective.loss(theta));
  std::copy(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(f), m.weights.begin());
  m.bias = theta[f];
  return m;
}

ShardModel train_shard(const InducedSubgraph& shard, const ModelHyperparams& hp) {
  return train_shard(shard.graph, shard.to_parent, hp);
}

std::vector<double> model_features(const ShardModel& m, NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  const auto i = m.local_index(u), j = m.local_index(v);
  if (i < 0 || j < 0) throw NotFoundError("model_features: endpoint outside shard");
  std::vector<double> f(feature_count(m.d));
  raw_features_local(m, static_cast<std::size_t>(i), static_cast<std::size_t>(j), f.data());
  return f;
}

double predict(const ShardModel& m, NodeId u, NodeId v) {
  if (m.prior_only || u == v) return m.prior;
  if (u > v) std::swap(u, v);
  const auto i = m.local_index(u), j = m.local_index(v);
  if (i < 0 || j < 0) return m.prior;
  const std::size_t f = feature_count(m.d);
  double buf[256];
  std::vector<double> heap;
  double* x = buf;
  if (f > 256) {
    heap.resize(f);
    x = heap.data();
  }
  raw_features_local(m, static_cast<std::size_t>(i), static_cast<std::size_t>(j), x);
  double s = m.bias;
  for (std::size_t c = 0; c < f; ++c) s += m.weights[c] * (x[c] - m.feature_mean[c]) * m.feature_scale[c];
  return sigmoid(s);
}

}  // namespace sgu
