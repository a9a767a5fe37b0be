#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgu/clustering.hpp"
#include "sgu/extraction.hpp"
#include "sgu/shard_model.hpp"
#include "sgu/unlearning.hpp"

namespace sgu {

using Json = nlohmann::json;

Json groups_to_json(const std::vector<OppositiveGroup>& groups);
std::vector<OppositiveGroup> groups_from_json(const Json& j);

/// {"k", "delta_final", "assignment": {"node": shard}}.
Json partition_to_json(const Partition& p);
/// Rebuilds caches against `g`; throws ValidationError when the assignment
/// does not cover exactly the nodes of `g`.
Partition partition_from_json(const SignedGraph& g, const Json& j);

Json diagnostics_to_json(const PartitionDiagnostics& d);

Json hyperparams_to_json(const ModelHyperparams& hp);
ModelHyperparams hyperparams_from_json(const Json& j);

/// Every field needed to reproduce predictions bit for bit.
Json shard_to_json(const ShardModel& m);
ShardModel shard_from_json(const Json& j);

Json edges_to_json(std::span<const Edge> edges);
std::vector<Edge> edges_from_json(const Json& j);

/// Writes through a sibling temp file and a rename. Leaves the file alone when
/// its current bytes already match.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

/// Checkpoint layout: manifest.json, partition.json, shards/shard_NNNN.json.
void save_ensemble(const std::filesystem::path& dir, const EnsembleModel& e);
EnsembleModel load_ensemble(const std::filesystem::path& dir);
std::filesystem::path shard_file(const std::filesystem::path& dir, ShardId s);

/// JSON lines: {"op":"remove-edge","u":..,"v":..} or {"op":"remove-node","u":..}.
/// Blank lines are skipped.
std::vector<UnlearnRequest> read_requests(std::istream& in);
std::vector<UnlearnRequest> load_requests(const std::filesystem::path& path);
void write_requests(std::ostream& out, std::span<const UnlearnRequest> requests);

/// `u,v,sign` lines as written by write_graph_csv, kept in file order.
std::vector<Edge> read_signed_edges(std::istream& in);
std::vector<Edge> load_signed_edges(const std::filesystem::path& path);

}  // namespace sgu
