#include "sgu/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sgu/error.hpp"

namespace sgu {

namespace fs = std::filesystem;

namespace {

std::vector<NodeId> ids_from_json(const Json& j) {
  std::vector<NodeId> out;
  out.reserve(j.size());
  for (const Json& x : j) out.push_back(x.get<NodeId>());
  return out;
}

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing field \"") + key + "\"");
  return *it;
}

}  // namespace

Json groups_to_json(const std::vector<OppositiveGroup>& groups) {
  Json out = Json::array();
  for (const OppositiveGroup& g : groups) {
    out.push_back({{"p", g.p_side}, {"n", g.n_side}, {"cohesion", g.cohesion}});
  }
  return out;
}

std::vector<OppositiveGroup> groups_from_json(const Json& j) {
  std::vector<OppositiveGroup> out;
  for (const Json& g : j) {
    out.push_back({ids_from_json(field(g, "p")), ids_from_json(field(g, "n")), field(g, "cohesion").get<double>()});
  }
  return out;
}

Json partition_to_json(const Partition& p) {
  Json assignment = Json::object();
  for (std::size_t u = 0; u < p.assignment.size(); ++u) assignment[std::to_string(u)] = p.assignment[u];
  return {{"k", p.k}, {"delta_final", p.delta_final}, {"assignment", std::move(assignment)}};
}

Partition partition_from_json(const SignedGraph& g, const Json& j) {
  const std::size_t k = field(j, "k").get<std::size_t>();
  const Json& assignment = field(j, "assignment");
  if (assignment.size() != g.node_count()) {
    throw ValidationError("partition assigns " + std::to_string(assignment.size()) + " nodes but the graph has " +
                          std::to_string(g.node_count()));
  }
  constexpr std::uint32_t kUnset = ~std::uint32_t{0};
  std::vector<std::uint32_t> labels(g.node_count(), kUnset);
  for (const auto& [key, value] : assignment.items()) {
    std::size_t pos = 0;
    unsigned long node = 0;
    try {
      node = std::stoul(key, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != key.size() || node >= g.node_count()) {
      throw ValidationError("partition names node \"" + key + "\" outside the graph");
    }
    const auto shard = value.get<std::uint32_t>();
    if (shard >= k) throw ValidationError("partition shard id " + std::to_string(shard) + " >= k");
    labels[node] = shard;
  }
  for (std::uint32_t l : labels) {
    if (l == kUnset) throw ValidationError("partition leaves a node unassigned");
  }
  Partition p = make_partition(g, labels, field(j, "delta_final").get<double>());
  if (p.k != k) throw ValidationError("partition declares k=" + std::to_string(k) + " but uses " + std::to_string(p.k));
  return p;
}

Json diagnostics_to_json(const PartitionDiagnostics& d) {
  Json shards = Json::array();
  for (std::size_t s = 0; s < d.shards.size(); ++s) {
    const ShardDiagnostics& x = d.shards[s];
    shards.push_back({{"shard", s},
                      {"nodes", x.nodes},
                      {"intra_edges", x.intra_edges},
                      {"positive_edges", x.positive_edges},
                      {"positive_fraction", x.positive_fraction ? Json(*x.positive_fraction) : Json(nullptr)},
                      {"balance_ratio", x.balance_ratio},
                      {"triangles", x.triangles}});
  }
  return {{"total_edges", d.total_edges},
          {"intra_edges", d.intra_edges},
          {"cut_edges", d.cut_edges},
          {"max_mean_intra_ratio", d.max_mean_intra_ratio},
          {"mean_balance_ratio", d.mean_balance_ratio},
          {"min_balance_ratio", d.min_balance_ratio},
          {"shards", std::move(shards)}};
}

Json hyperparams_to_json(const ModelHyperparams& hp) {
  return {{"embed_dim", hp.embed_dim},
          {"learning_rate", hp.learning_rate},
          {"epochs", hp.epochs},
          {"l2", hp.l2},
          {"seed", hp.seed}};
}

ModelHyperparams hyperparams_from_json(const Json& j) {
  ModelHyperparams hp;
  hp.embed_dim = field(j, "embed_dim").get<std::size_t>();
  hp.learning_rate = field(j, "learning_rate").get<double>();
  hp.epochs = field(j, "epochs").get<std::size_t>();
  hp.l2 = field(j, "l2").get<double>();
  hp.seed = field(j, "seed").get<std::uint64_t>();
  return hp;
}

Json edges_to_json(std::span<const Edge> edges) {
  Json out = Json::array();
  for (const Edge& e : edges) out.push_back({e.u, e.v, to_int(e.sign)});
  return out;
}

std::vector<Edge> edges_from_json(const Json& j) {
  std::vector<Edge> out;
  out.reserve(j.size());
  for (const Json& e : j) {
    if (!e.is_array() || e.size() != 3) throw ValidationError("edge entry must be [u, v, sign]");
    const int s = e[2].get<int>();
    if (s != 1 && s != -1) throw ValidationError("edge sign must be +1 or -1");
    out.push_back({e[0].get<NodeId>(), e[1].get<NodeId>(), s > 0 ? Sign::kPositive : Sign::kNegative});
  }
  return out;
}

Json shard_to_json(const ShardModel& m) {
  Json embeddings = Json::array();
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    auto row = m.embedding.row(i);
    embeddings.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"prior", m.prior},
          {"d", m.d},
          {"weights", m.weights},
          {"bias", m.bias},
          {"nodes", m.nodes},
          {"embeddings", std::move(embeddings)},
          {"prior_only", m.prior_only},
          {"feature_mean", m.feature_mean},
          {"feature_scale", m.feature_scale},
          {"pos_degree", m.pos_degree},
          {"neg_degree", m.neg_degree},
          {"degree_scale", m.degree_scale},
          {"train_edges", edges_to_json(m.train_edges)}};
}

ShardModel shard_from_json(const Json& j) {
  ShardModel m;
  m.prior = field(j, "prior").get<double>();
  m.d = field(j, "d").get<std::size_t>();
  m.weights = field(j, "weights").get<std::vector<double>>();
  m.bias = field(j, "bias").get<double>();
  m.nodes = ids_from_json(field(j, "nodes"));
  m.embedding.dim = m.d;
  const Json& rows = field(j, "embeddings");
  if (rows.size() != m.nodes.size()) throw ValidationError("shard embeddings and nodes differ in length");
  m.embedding.values.reserve(m.nodes.size() * m.d);
  for (const Json& row : rows) {
    if (row.size() != m.d) throw ValidationError("shard embedding row has the wrong width");
    for (const Json& x : row) m.embedding.values.push_back(x.get<double>());
  }
  m.prior_only = field(j, "prior_only").get<bool>();
  m.feature_mean = field(j, "feature_mean").get<std::vector<double>>();
  m.feature_scale = field(j, "feature_scale").get<std::vector<double>>();
  m.pos_degree = field(j, "pos_degree").get<std::vector<std::uint32_t>>();
  m.neg_degree = field(j, "neg_degree").get<std::vector<std::uint32_t>>();
  m.degree_scale = field(j, "degree_scale").get<double>();
  m.train_edges = edges_from_json(field(j, "train_edges"));
  const std::size_t f = feature_count(m.d);
  if (m.weights.size() != f || m.feature_mean.size() != f || m.feature_scale.size() != f ||
      m.pos_degree.size() != m.nodes.size() || m.neg_degree.size() != m.nodes.size()) {
    throw ValidationError("shard checkpoint fields have inconsistent sizes");
  }
  return m;
}

// ---------------------------------------------------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (fs::exists(path, ec)) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in && ss.str() == content) return;
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Json read_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

fs::path shard_file(const fs::path& dir, ShardId s) {
  std::ostringstream name;
  name << "shard_" << std::setw(4) << std::setfill('0') << s << ".json";
  return dir / "shards" / name.str();
}

void save_ensemble(const fs::path& dir, const EnsembleModel& e) {
  Json files = Json::array();
  for (ShardId s = 0; s < e.shards.size(); ++s) {
    write_file_atomic(shard_file(dir, s), shard_to_json(e.shards[s]).dump() + "\n");
    files.push_back(fs::relative(shard_file(dir, s), dir).generic_string());
  }
  write_file_atomic(dir / "partition.json", partition_to_json(e.partition).dump() + "\n");
  const Json manifest = {{"format", "sgu-ensemble/1"},
                         {"node_count", e.node_count},
                         {"k", e.k()},
                         {"global_seed", e.global_seed},
                         {"hyperparams", hyperparams_to_json(e.hp)},
                         {"aggregation", to_string(e.aggregation)},
                         {"shard_seeds", [&] {
                            Json seeds = Json::array();
                            for (ShardId s = 0; s < e.shards.size(); ++s) {
                              seeds.push_back(shard_hyperparams(e.hp, e.global_seed, s).seed);
                            }
                            return seeds;
                          }()},
                         {"shards", std::move(files)},
                         {"cut_edges", edges_to_json(e.cut_edges)},
                         {"removed_nodes", e.removed_nodes},
                         {"warnings", e.warnings}};
  write_file_atomic(dir / "manifest.json", manifest.dump(1) + "\n");
}

EnsembleModel load_ensemble(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("checkpoint directory " + dir.string() + " does not exist");
  const Json manifest = read_json_file(dir / "manifest.json");
  EnsembleModel e;
  e.node_count = field(manifest, "node_count").get<std::size_t>();
  e.global_seed = field(manifest, "global_seed").get<std::uint64_t>();
  e.hp = hyperparams_from_json(field(manifest, "hyperparams"));
  const auto agg = parse_aggregation(field(manifest, "aggregation").get<std::string>());
  if (!agg) throw ValidationError("unknown aggregation in manifest");
  e.aggregation = *agg;
  e.cut_edges = edges_from_json(field(manifest, "cut_edges"));
  e.removed_nodes = ids_from_json(field(manifest, "removed_nodes"));
  e.warnings = field(manifest, "warnings").get<std::vector<std::string>>();
  const std::size_t k = field(manifest, "k").get<std::size_t>();
  for (ShardId s = 0; s < k; ++s) e.shards.push_back(shard_from_json(read_json_file(shard_file(dir, s))));

  const SignedGraph g(e.node_count, e.training_edges());
  e.partition = partition_from_json(g, read_json_file(dir / "partition.json"));
  if (e.partition.k != k) throw ValidationError("manifest and partition disagree on k");
  for (ShardId s = 0; s < k; ++s) {
    for (NodeId u : e.shards[s].nodes) {
      if (e.partition.assignment[u] != s) throw ValidationError("shard checkpoint holds a node of another shard");
    }
  }
  return e;
}

// ---------------------------------------------------------------------------

std::vector<UnlearnRequest> read_requests(std::istream& in) {
  std::vector<UnlearnRequest> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      throw ParseError("request is not valid JSON", line_no);
    }
    try {
      const std::string op = j.at("op").get<std::string>();
      if (op == "remove-edge") {
        out.push_back(UnlearnRequest::remove_edge(j.at("u").get<NodeId>(), j.at("v").get<NodeId>()));
      } else if (op == "remove-node") {
        out.push_back(UnlearnRequest::remove_node(j.at("u").get<NodeId>()));
      } else {
        throw ParseError("unknown op \"" + op + "\"", line_no);
      }
    } catch (const Json::exception&) {
      throw ParseError("request needs \"op\" and integer node ids", line_no);
    }
  }
  return out;
}

std::vector<UnlearnRequest> load_requests(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_requests(in);
}

void write_requests(std::ostream& out, std::span<const UnlearnRequest> requests) {
  for (const UnlearnRequest& r : requests) {
    const Json j = r.kind == UnlearnRequest::Kind::kRemoveEdge
                       ? Json{{"op", "remove-edge"}, {"u", r.u}, {"v", r.v}}
                       : Json{{"op", "remove-node"}, {"u", r.u}};
    out << j.dump() << "\n";
  }
}

std::vector<Edge> read_signed_edges(std::istream& in) {
  std::vector<Edge> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    unsigned long long u = 0, v = 0;
    int s = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%llu,%llu,%d%c", &u, &v, &s, &tail) != 3 || (s != 1 && s != -1)) {
      throw ParseError("expected u,v,+1|-1", line_no);
    }
    out.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), s > 0 ? Sign::kPositive : Sign::kNegative});
  }
  return out;
}

std::vector<Edge> load_signed_edges(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_signed_edges(in);
}

}  // namespace sgu
