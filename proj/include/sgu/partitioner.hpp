#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgu/clustering.hpp"
#include "sgu/extraction.hpp"
#include "sgu/unlearning.hpp"

namespace sgu {

enum class PartitionerKind { kSgu, kRandom };

std::string to_string(PartitionerKind kind);
std::optional<PartitionerKind> parse_partitioner(const std::string& name);

struct PartitionResult {
  /// Extracted groups (after any bisection); empty for the random baseline.
  std::vector<OppositiveGroup> groups;
  Partition partition;
  double extraction_seconds = 0.0;
  double clustering_seconds = 0.0;
};

/// Extraction, bisection when fewer than k groups come out, then balanced
/// agglomeration down to k shards.
PartitionResult sgu_partition(const SignedGraph& g, const ExtractionParams& ep,
                              const ClusteringParams& cp, std::uint64_t seed);

PartitionResult run_partitioner(PartitionerKind kind, const SignedGraph& g, const ExtractionParams& ep,
                                const ClusteringParams& cp, std::uint64_t seed);

/// Scratch retraining that also re-extracts and re-clusters on the reduced
/// graph instead of keeping the training-time partition.
EnsembleModel scratch_retrain_repartition(const SignedGraph& g_train_reduced, PartitionerKind kind,
                                          const ExtractionParams& ep, const ClusteringParams& cp,
                                          const ModelHyperparams& hp, std::uint64_t global_seed,
                                          const TrainOptions& options = {});

}  // namespace sgu
