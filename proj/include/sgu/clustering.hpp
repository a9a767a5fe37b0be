#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sgu/extraction.hpp"
#include "sgu/signed_graph.hpp"

namespace sgu {

using ShardId = std::uint32_t;

struct Cluster {
  std::vector<NodeId> members;  // ascending
  std::size_t intra_edges = 0;
  TriadCensus census;

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

/// Disjoint cover of V by k shards. Shards are numbered by their smallest
/// member, so equal covers always produce equal partitions.
struct Partition {
  std::size_t k = 0;
  std::vector<ShardId> assignment;  // node -> shard
  std::vector<Cluster> clusters;
  double delta_final = 0.0;

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Builds a partition from any node -> label map (labels need not be dense),
/// renumbering shards by smallest member and computing all caches.
Partition make_partition(const SignedGraph& g, std::span<const std::uint32_t> labels,
                         double delta_final = 0.0);

/// Checks coverage, dense shard ids and cache consistency against fresh
/// recomputation. Throws ValidationError.
void validate_partition(const SignedGraph& g, const Partition& p);

struct ClusteringParams {
  std::size_t k = 10;
  double alpha = 0.5;
  double delta = 0.25;

  void validate() const;
};

/// cut(Ci,Cj)/|Ci| + cut(Ci,Cj)/|Cj| with every edge weighted 1 regardless of
/// sign. Sets must be non-empty and disjoint.
double ratio_cut(const SignedGraph& g, std::span<const NodeId> ci, std::span<const NodeId> cj);

double balance_ratio_merged(const SignedGraph& g, std::span<const NodeId> ci,
                            std::span<const NodeId> cj);

/// alpha * ratio_cut / rc_norm + (1 - alpha) * balance_ratio_merged.
double similarity(const SignedGraph& g, std::span<const NodeId> ci, std::span<const NodeId> cj,
                  double alpha, double rc_norm);

/// Pure scoring rule shared by `similarity` and the merge loop.
double similarity_score(double ratio_cut_value, double balance_ratio_value, double alpha,
                        double rc_norm);

/// ceil((1 + delta) * |E| / k).
std::size_t edge_cap(std::size_t edge_count, std::size_t k, double delta);

struct MergeRecord {
  std::size_t round = 0;
  std::vector<NodeId> merged_a;  // members before the merge
  std::vector<NodeId> merged_b;
  double similarity = 0.0;
  double delta = 0.0;
  /// Candidates scored this round (node sets, with their similarity); only
  /// kept when tracing is enabled.
  std::vector<std::pair<std::vector<NodeId>, std::vector<NodeId>>> candidates;
  std::vector<double> candidate_scores;
};

struct AgglomerationOptions {
  /// Record every merge (and, if `trace_candidates`, every round's scored
  /// candidate set) for inspection in tests.
  bool record_merges = false;
  bool trace_candidates = false;
};

struct AgglomerationResult {
  Partition partition;
  std::vector<MergeRecord> merges;
};

/// Greedy agglomeration of groups (each group is an atomic initial cluster)
/// down to exactly k clusters under the cap ceil((1+delta)|E|/k) on merged
/// intra-edge counts. Each round scores the feasible pairs joined by at least
/// one edge (all feasible pairs if none is connected), normalizing RatioCut by
/// the round's maximum, and merges the best pair; ties go to the smaller
/// merged size, then the lower smallest member. When no pair fits, delta is
/// raised by 0.25. It is first raised until every input group fits.
AgglomerationResult agglomerate(const SignedGraph& g, std::span<const OppositiveGroup> groups,
                                const ClusteringParams& params, const AgglomerationOptions& options = {});

/// Splits the largest groups by the sign pattern of their leading signed
/// eigenvector until at least k groups exist.
std::vector<OppositiveGroup> bisect_until(const SignedGraph& g, std::vector<OppositiveGroup> groups,
                                          std::size_t k, std::uint64_t seed);

/// Edges with both endpoints in the sorted node list.
std::size_t intra_edge_count(const SignedGraph& g, const std::vector<NodeId>& sorted_members);

/// Splits every group holding more than cap edges, the same way, until each
/// fits or is a singleton.
std::vector<OppositiveGroup> bisect_oversized(const SignedGraph& g, std::vector<OppositiveGroup> groups,
                                              std::size_t cap, std::uint64_t seed);

/// Nodes shuffled by seed and dealt round-robin into k shards.
Partition random_balanced_partition(const SignedGraph& g, std::size_t k, std::uint64_t seed);

struct ShardDiagnostics {
  std::size_t nodes = 0;
  std::size_t intra_edges = 0;
  std::size_t positive_edges = 0;
  /// Empty for shards without edges.
  std::optional<double> positive_fraction;
  double balance_ratio = 1.0;
  std::uint64_t triangles = 0;
};

struct PartitionDiagnostics {
  std::vector<ShardDiagnostics> shards;
  std::size_t total_edges = 0;
  std::size_t cut_edges = 0;
  std::size_t intra_edges = 0;
  /// max intra / mean intra over shards.
  double max_mean_intra_ratio = 0.0;
  double mean_balance_ratio = 1.0;
  double min_balance_ratio = 1.0;
};

PartitionDiagnostics partition_diagnostics(const SignedGraph& g, const Partition& p);

}  // namespace sgu
