#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgu/partitioner.hpp"
#include "sgu/serialization.hpp"
#include "sgu/unlearning.hpp"

namespace sgu {

struct SplitSpec {
  double train_fraction = 0.8;
  bool stratify_by_sign = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EdgeSplit {
  /// Same node set as the input graph, train edges only.
  SignedGraph train;
  /// Held-out edges, sorted.
  std::vector<Edge> test;
  std::vector<std::string> warnings;
};

/// Per-sign shuffle by seed with round(train_fraction * count) edges of each
/// sign kept for training. A sign with fewer than two edges makes the split
/// fall back to one unstratified shuffle.
EdgeSplit split_edges(const SignedGraph& g, const SplitSpec& spec);

struct F1Report {
  double macro_f1 = 0.0;
  /// Unset when the class has neither true instances nor predictions.
  std::optional<double> f1_positive;
  std::optional<double> f1_negative;
  std::size_t tp = 0;  // positive class is "positive"
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t count() const { return tp + fp + fn + tn; }
};

/// Positive prediction when p >= threshold. Labels are +1 / -1. Throws
/// InvalidParamsError on empty or mismatched input.
F1Report macro_f1(std::span<const double> probabilities, std::span<const int> labels, double threshold = 0.5);

/// max(p, 1 - p).
inline double attack_confidence(double p) { return p > 0.5 ? p : 1.0 - p; }

/// P(member score > non-member score) with ties counted half, computed
/// exactly by sorting. Throws InvalidParamsError on an empty list.
double mia_auc(std::span<const double> member_scores, std::span<const double> nonmember_scores);

/// Attack confidences of the ensemble on a list of pairs.
std::vector<double> attack_scores(const EnsembleModel& e, std::span<const Edge> pairs);

std::vector<double> ensemble_predictions(const EnsembleModel& e, std::span<const Edge> pairs);
std::vector<int> sign_labels(std::span<const Edge> edges);
F1Report evaluate_f1(const EnsembleModel& e, std::span<const Edge> test);

struct MetricSummary {
  double mean = 0.0;
  /// Sample standard deviation; 0 for a single value.
  double stddev = 0.0;
  std::size_t n = 0;
};

MetricSummary summarize(std::span<const double> values);

/// One row of a report table: a label plus named metric columns.
struct ReportRow {
  std::string label;
  std::vector<std::pair<std::string, MetricSummary>> metrics;
};

/// Evaluation of one configuration, possibly over several repeats.
struct EvalReport {
  std::string dataset;
  std::vector<F1Report> runs;
  /// (original, unlearned) attack AUC per run, when measured.
  std::vector<std::pair<double, double>> mia_auc;
  std::vector<ReportRow> rows;
  std::vector<std::string> notes;
};

Json f1_to_json(const F1Report& r);
Json eval_report_to_json(const EvalReport& r);
/// Aligned columns, "mean ± std" cells.
std::string format_table(const std::vector<ReportRow>& rows, const std::string& first_column = "model");

struct BenchmarkConfig {
  PartitionerKind partitioner = PartitionerKind::kSgu;
  ExtractionParams extraction;
  ClusteringParams clustering;
  ModelHyperparams model;
  SplitSpec split;
  double deletion_fraction = 0.005;
  std::uint64_t seed = 0;
  TrainOptions train{1, Aggregation::kCoveringMean};
  /// Skip the full scratch retrain (and its exactness check).
  bool skip_scratch = false;
};

struct DeletionTiming {
  Edge edge;
  bool cut = false;
  std::optional<ShardId> shard;
  double seconds = 0.0;
};

struct UnlearnBenchmark {
  PartitionerKind partitioner = PartitionerKind::kSgu;
  std::size_t k = 0;
  std::size_t train_edges = 0;
  std::size_t test_edges = 0;
  std::size_t cut_edges = 0;
  double delta_final = 0.0;
  double mean_balance_ratio = 1.0;
  double extraction_seconds = 0.0;
  double clustering_seconds = 0.0;
  double train_seconds = 0.0;
  double scratch_seconds = 0.0;
  std::vector<DeletionTiming> deletions;
  double mean_intra_seconds = 0.0;
  double mean_cut_seconds = 0.0;
  double mean_unlearn_seconds = 0.0;
  std::size_t intra_deletions = 0;
  std::size_t cut_deletions = 0;
  F1Report f1_before;
  F1Report f1_after;
  std::optional<F1Report> f1_scratch;
  /// Attack AUC on deleted training edges against an equal-size sample of
  /// test edges, before and after unlearning.
  double mia_original = 0.5;
  double mia_unlearned = 0.5;
  /// Unlearned ensemble equals the scratch retrain bit for bit.
  std::optional<bool> exact;
  std::vector<std::string> warnings;
};

/// Split, partition, train, delete a sample of training edges one request at
/// a time, then retrain from scratch on the reduced set with the same
/// partition for timing and exactness. Training is single-threaded by default
/// so wall times are comparable.
UnlearnBenchmark run_unlearn_benchmark(const SignedGraph& g, const BenchmarkConfig& config);

/// Deterministic (timing-free) part of a benchmark as JSON.
Json benchmark_to_json(const UnlearnBenchmark& b);
Json benchmark_timing_to_json(const UnlearnBenchmark& b);

}  // namespace sgu
