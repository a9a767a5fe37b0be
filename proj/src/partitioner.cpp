#include "sgu/partitioner.hpp"

#include <chrono>

namespace sgu {

std::string to_string(PartitionerKind kind) { return kind == PartitionerKind::kSgu ? "sgu" : "random"; }

std::optional<PartitionerKind> parse_partitioner(const std::string& name) {
  if (name == "sgu") return PartitionerKind::kSgu;
  if (name == "random") return PartitionerKind::kRandom;
  return std::nullopt;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

}  // namespace

PartitionResult sgu_partition(const SignedGraph& g, const ExtractionParams& ep, const ClusteringParams& cp,
                              std::uint64_t seed) {
  cp.validate();
  PartitionResult out;
  auto t0 = Clock::now();
  out.groups = extract_groups(g, ep, seed);
  out.extraction_seconds = seconds_since(t0);

  t0 = Clock::now();
  if (out.groups.size() < cp.k) out.groups = bisect_until(g, std::move(out.groups), cp.k, seed);
  out.groups = bisect_oversized(g, std::move(out.groups), edge_cap(g.edge_count(), cp.k, cp.delta), seed);
  out.partition = agglomerate(g, out.groups, cp).partition;
  out.clustering_seconds = seconds_since(t0);
  return out;
}

PartitionResult run_partitioner(PartitionerKind kind, const SignedGraph& g, const ExtractionParams& ep,
                                const ClusteringParams& cp, std::uint64_t seed) {
  if (kind == PartitionerKind::kSgu) return sgu_partition(g, ep, cp, seed);
  cp.validate();
  PartitionResult out;
  const auto t0 = Clock::now();
  out.partition = random_balanced_partition(g, cp.k, seed);
  out.clustering_seconds = seconds_since(t0);
  return out;
}

EnsembleModel scratch_retrain_repartition(const SignedGraph& g_train_reduced, PartitionerKind kind,
                                          const ExtractionParams& ep, const ClusteringParams& cp,
                                          const ModelHyperparams& hp, std::uint64_t global_seed,
                                          const TrainOptions& options) {
  const PartitionResult pr = run_partitioner(kind, g_train_reduced, ep, cp, global_seed);
  return train_all(g_train_reduced, pr.partition, hp, global_seed, options);
}

}  // namespace sgu
