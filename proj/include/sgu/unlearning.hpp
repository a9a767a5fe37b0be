#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgu/clustering.hpp"
#include "sgu/shard_model.hpp"
#include "sgu/signed_graph.hpp"

namespace sgu {

/// How shard posteriors are combined.
enum class Aggregation {
  /// Mean over shards whose model embeds both endpoints; pairs no shard
  /// covers (cut pairs) get the smoothed positive share of the cut training
  /// edges.
  kCoveringMean,
  /// Mean over all k shards, each falling back to its own prior.
  kPriorMean,
};

std::string to_string(Aggregation a);
std::optional<Aggregation> parse_aggregation(const std::string& name);

struct TrainOptions {
  /// 0 selects std::thread::hardware_concurrency().
  std::size_t threads = 0;
  Aggregation aggregation = Aggregation::kCoveringMean;
};

/// k independently trained shard models over a fixed node partition.
struct EnsembleModel {
  std::size_t node_count = 0;
  Partition partition;
  std::vector<ShardModel> shards;
  std::uint64_t global_seed = 0;
  ModelHyperparams hp;
  Aggregation aggregation = Aggregation::kCoveringMean;
  /// Training edges whose endpoints lie in different shards; used by no shard.
  std::vector<Edge> cut_edges;
  /// Nodes deleted by remove-node requests, ascending.
  std::vector<NodeId> removed_nodes;
  std::vector<std::string> warnings;

  std::size_t k() const { return shards.size(); }
  ShardId shard_of(NodeId u) const { return partition.assignment.at(u); }
  bool is_removed(NodeId u) const;
  /// Smoothed positive share of the cut edges: (pos + 1) / (count + 2).
  double cut_prior() const;
  /// Current training set: every shard's edges plus the cut edges, sorted.
  std::vector<Edge> training_edges() const;
  std::size_t training_edge_count() const;
};

/// Shards, cut edges, removals, seeds and assignment agree bit for bit.
bool same_models(const EnsembleModel& a, const EnsembleModel& b);

/// Seeds each shard independently from the global seed.
ModelHyperparams shard_hyperparams(const ModelHyperparams& hp, std::uint64_t global_seed, ShardId shard);

/// The training subgraph of one shard: its surviving members and the given
/// intra-shard edges.
InducedSubgraph shard_training_graph(std::size_t node_count, std::span<const NodeId> members,
                                     std::span<const NodeId> removed, std::span<const Edge> edges);

EnsembleModel train_all(const SignedGraph& g_train, const Partition& p, const ModelHyperparams& hp,
                        std::uint64_t global_seed, const TrainOptions& options = {},
                        std::span<const NodeId> removed_nodes = {});

double aggregate_predict(const EnsembleModel& e, NodeId u, NodeId v);
double aggregate_predict(const EnsembleModel& e, NodeId u, NodeId v, Aggregation rule);

struct UnlearnRequest {
  enum class Kind { kRemoveEdge, kRemoveNode };
  Kind kind = Kind::kRemoveEdge;
  NodeId u = 0;
  NodeId v = 0;

  static UnlearnRequest remove_edge(NodeId a, NodeId b) { return {Kind::kRemoveEdge, a, b}; }
  static UnlearnRequest remove_node(NodeId a) { return {Kind::kRemoveNode, a, 0}; }
  friend bool operator==(const UnlearnRequest&, const UnlearnRequest&) = default;
};

struct UnlearnReport {
  bool applied = false;
  std::optional<ShardId> retrained_shard;
  bool was_cut_edge = false;
  std::size_t edges_removed = 0;
  double seconds = 0.0;
  std::string notice;
};

/// Applies one request in place. Intra-shard deletions retrain exactly the
/// owning shard with its original seed; cut-edge deletions only update the
/// cut list. Requests for training edges that are not (or no longer) present
/// are no-ops with a notice. Throws NotFoundError for nodes outside the graph.
UnlearnReport unlearn(EnsembleModel& e, const UnlearnRequest& r);

/// Retrains every shard from scratch on the reduced training graph with the
/// ensemble's fixed partition and seeds.
EnsembleModel scratch_retrain(const SignedGraph& g_train_reduced, const Partition& p,
                              const ModelHyperparams& hp, std::uint64_t global_seed,
                              std::span<const NodeId> removed_nodes = {},
                              const TrainOptions& options = {});

/// The training graph left after deleting `removals` from `g_train`.
SignedGraph apply_removals(const SignedGraph& g_train, std::span<const UnlearnRequest> removals);

}  // namespace sgu
