#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "sgu/evaluation.hpp"

namespace sgu {

/// Everything one pipeline run needs.
struct RunConfig {
  /// Edge-list file; the synthetic generator is used when unset.
  std::optional<std::string> dataset;
  EdgeFormat format = EdgeFormat::kRawRating;
  std::optional<std::string> preset;
  SsbmParams synth;
  ExtractionParams extraction;
  ClusteringParams clustering;
  ModelHyperparams model;
  /// split.seed is ignored in favour of split_seed, or the global seed.
  SplitSpec split;
  std::optional<std::uint64_t> split_seed;
  PartitionerKind partitioner = PartitionerKind::kSgu;
  Aggregation aggregation = Aggregation::kCoveringMean;
  std::uint64_t global_seed = 0;
  std::string out = "out";
  std::size_t repeats = 1;
  double deletion_fraction = 0.005;
  /// 0 selects the hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
  SplitSpec effective_split() const;
};

/// Shard counts used for the public rating datasets.
std::optional<std::size_t> preset_shard_count(const std::string& preset);

/// A flat view of `key = value` lines with `[section]` headers, keyed as
/// "section.key". `#` starts a comment; strings may be double-quoted.
std::map<std::string, std::string> parse_key_values(std::istream& in);

/// Applies parsed keys over `base`. A preset sets k unless the same source
/// also sets clustering.k. Throws ConfigError on unknown keys or bad values.
RunConfig apply_config(RunConfig base, const std::map<std::string, std::string>& values);

RunConfig load_config(const std::filesystem::path& path);

Json config_to_json(const RunConfig& c);

}  // namespace sgu
