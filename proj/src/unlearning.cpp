#include "sgu/unlearning.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "sgu/error.hpp"
#include "sgu/rng.hpp"

namespace sgu {

std::string to_string(Aggregation a) {
  return a == Aggregation::kCoveringMean ? "covering-mean" : "prior-mean";
}

std::optional<Aggregation> parse_aggregation(const std::string& name) {
  if (name == "covering-mean") return Aggregation::kCoveringMean;
  if (name == "prior-mean") return Aggregation::kPriorMean;
  return std::nullopt;
}

bool EnsembleModel::is_removed(NodeId u) const {
  return std::binary_search(removed_nodes.begin(), removed_nodes.end(), u);
}

double EnsembleModel::cut_prior() const {
  std::size_t pos = 0;
  for (const Edge& e : cut_edges) pos += e.sign == Sign::kPositive;
  return (static_cast<double>(pos) + 1.0) / (static_cast<double>(cut_edges.size()) + 2.0);
}

std::vector<Edge> EnsembleModel::training_edges() const {
  std::vector<Edge> all(cut_edges);
  for (const ShardModel& m : shards) all.insert(all.end(), m.train_edges.begin(), m.train_edges.end());
  std::sort(all.begin(), all.end());
  return all;
}

std::size_t EnsembleModel::training_edge_count() const {
  std::size_t count = cut_edges.size();
  for (const ShardModel& m : shards) count += m.train_edges.size();
  return count;
}

bool same_models(const EnsembleModel& a, const EnsembleModel& b) {
  return a.node_count == b.node_count && a.partition.assignment == b.partition.assignment &&
         a.global_seed == b.global_seed && a.hp == b.hp && a.aggregation == b.aggregation &&
         a.cut_edges == b.cut_edges && a.removed_nodes == b.removed_nodes && a.shards == b.shards;
}

ModelHyperparams shard_hyperparams(const ModelHyperparams& hp, std::uint64_t global_seed, ShardId shard) {
  ModelHyperparams out = hp;
  out.seed = derive_seed(global_seed, "shard", shard);
  return out;
}

InducedSubgraph shard_training_graph(std::size_t node_count, std::span<const NodeId> members,
                                     std::span<const NodeId> removed, std::span<const Edge> edges) {
  InducedSubgraph out;
  for (NodeId u : members) {
    if (!std::binary_search(removed.begin(), removed.end(), u)) out.to_parent.push_back(u);
  }
  std::sort(out.to_parent.begin(), out.to_parent.end());
  constexpr NodeId kAbsent = ~NodeId{0};
  std::vector<NodeId> local(node_count, kAbsent);
  for (std::size_t i = 0; i < out.to_parent.size(); ++i) local[out.to_parent[i]] = static_cast<NodeId>(i);
  std::vector<Edge> local_edges;
  local_edges.reserve(edges.size());
  for (const Edge& e : edges) {
    if (local[e.u] == kAbsent || local[e.v] == kAbsent) {
      throw ValidationError("shard edge endpoint is not a shard member");
    }
    local_edges.push_back({local[e.u], local[e.v], e.sign});
  }
  out.graph = SignedGraph(out.to_parent.size(), std::move(local_edges));
  return out;
}

namespace {

template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

EnsembleModel train_all(const SignedGraph& g_train, const Partition& p, const ModelHyperparams& hp,
                        std::uint64_t global_seed, const TrainOptions& options,
                        std::span<const NodeId> removed_nodes) {
  hp.validate();
  if (p.assignment.size() != g_train.node_count()) {
    throw ValidationError("partition covers " + std::to_string(p.assignment.size()) +
                          " nodes but the training graph has " + std::to_string(g_train.node_count()));
  }
  EnsembleModel e;
  e.node_count = g_train.node_count();
  e.partition = p;
  e.global_seed = global_seed;
  e.hp = hp;
  e.aggregation = options.aggregation;
  e.removed_nodes.assign(removed_nodes.begin(), removed_nodes.end());
  std::sort(e.removed_nodes.begin(), e.removed_nodes.end());
  e.removed_nodes.erase(std::unique(e.removed_nodes.begin(), e.removed_nodes.end()), e.removed_nodes.end());

  std::vector<std::vector<Edge>> shard_edges(p.k);
  for (const Edge& edge : g_train.edges()) {
    if (e.is_removed(edge.u) || e.is_removed(edge.v)) continue;
    const ShardId a = p.assignment[edge.u];
    if (a == p.assignment[edge.v]) {
      shard_edges[a].push_back(edge);
    } else {
      e.cut_edges.push_back(edge);
    }
  }
  e.shards.resize(p.k);
  parallel_for(p.k, options.threads, [&](std::size_t s) {
    const InducedSubgraph sg =
        shard_training_graph(e.node_count, p.clusters[s].members, e.removed_nodes, shard_edges[s]);
    e.shards[s] = train_shard(sg, shard_hyperparams(hp, global_seed, static_cast<ShardId>(s)));
  });
  for (std::size_t s = 0; s < p.k; ++s) {
    if (e.shards[s].prior_only) {
      e.warnings.push_back("shard " + std::to_string(s) + " has no training edges; prior-only model");
    }
  }
  return e;
}

double aggregate_predict(const EnsembleModel& e, NodeId u, NodeId v, Aggregation rule) {
  if (e.shards.empty()) return 0.5;
  if (rule == Aggregation::kPriorMean) {
    double sum = 0.0;
    for (const ShardModel& m : e.shards) sum += predict(m, u, v);
    return sum / static_cast<double>(e.shards.size());
  }
  double sum = 0.0;
  std::size_t covering = 0;
  // Shards are disjoint, so only the shard owning u can cover the pair.
  if (u < e.node_count && v < e.node_count && u != v) {
    const ShardModel& m = e.shards[e.partition.assignment[u]];
    if (!m.prior_only && m.embeds(u) && m.embeds(v)) {
      sum += predict(m, u, v);
      ++covering;
    }
  }
  return covering ? sum / static_cast<double>(covering) : e.cut_prior();
}

double aggregate_predict(const EnsembleModel& e, NodeId u, NodeId v) {
  return aggregate_predict(e, u, v, e.aggregation);
}

namespace {

void retrain_shard(EnsembleModel& e, ShardId s, std::vector<Edge> edges) {
  const InducedSubgraph sg =
      shard_training_graph(e.node_count, e.partition.clusters[s].members, e.removed_nodes, edges);
  ShardModel fresh = train_shard(sg, shard_hyperparams(e.hp, e.global_seed, s));
  e.shards[s] = std::move(fresh);
}

}  // namespace

UnlearnReport unlearn(EnsembleModel& e, const UnlearnRequest& r) {
  UnlearnReport report;
  const auto start = std::chrono::steady_clock::now();
  auto check_node = [&](NodeId u) {
    if (u >= e.node_count) throw NotFoundError("node " + std::to_string(u) + " does not exist");
  };
  check_node(r.u);

  if (r.kind == UnlearnRequest::Kind::kRemoveEdge) {
    check_node(r.v);
    if (r.u == r.v) throw NotFoundError("edge {" + std::to_string(r.u) + "," + std::to_string(r.v) + "} does not exist");
    const NodeId a = std::min(r.u, r.v), b = std::max(r.u, r.v);
    auto same_pair = [&](const Edge& x) { return x.u == a && x.v == b; };
    auto by_pair = [](const Edge& x, const Edge& y) { return pair_key(x) < pair_key(y); };
    const Edge probe{a, b, Sign::kPositive};
    if (e.shard_of(a) != e.shard_of(b)) {
      auto it = std::lower_bound(e.cut_edges.begin(), e.cut_edges.end(), probe, by_pair);
      if (it == e.cut_edges.end() || !same_pair(*it)) {
        report.notice = "edge not in training set; nothing to unlearn";
        return report;
      }
      e.cut_edges.erase(it);
      report.applied = true;
      report.was_cut_edge = true;
      report.edges_removed = 1;
      report.seconds = elapsed_seconds(start);
      return report;
    }
    const ShardId s = e.shard_of(a);
    std::vector<Edge> edges = e.shards[s].train_edges;
    auto it = std::lower_bound(edges.begin(), edges.end(), probe, by_pair);
    if (it == edges.end() || !same_pair(*it)) {
      report.notice = "edge not in training set; nothing to unlearn";
      return report;
    }
    edges.erase(it);
    retrain_shard(e, s, std::move(edges));
    report.applied = true;
    report.retrained_shard = s;
    report.edges_removed = 1;
    report.seconds = elapsed_seconds(start);
    return report;
  }

  if (e.is_removed(r.u)) {
    report.notice = "node already removed; nothing to unlearn";
    return report;
  }
  const NodeId u = r.u;
  const ShardId s = e.shard_of(u);
  e.removed_nodes.insert(std::upper_bound(e.removed_nodes.begin(), e.removed_nodes.end(), u), u);
  const std::size_t cut_before = e.cut_edges.size();
  std::erase_if(e.cut_edges, [&](const Edge& x) { return x.u == u || x.v == u; });
  std::vector<Edge> edges = e.shards[s].train_edges;
  const std::size_t intra_before = edges.size();
  std::erase_if(edges, [&](const Edge& x) { return x.u == u || x.v == u; });
  report.edges_removed = (cut_before - e.cut_edges.size()) + (intra_before - edges.size());
  retrain_shard(e, s, std::move(edges));
  report.applied = true;
  report.retrained_shard = s;
  report.seconds = elapsed_seconds(start);
  return report;
}

EnsembleModel scratch_retrain(const SignedGraph& g_train_reduced, const Partition& p,
                              const ModelHyperparams& hp, std::uint64_t global_seed,
                              std::span<const NodeId> removed_nodes, const TrainOptions& options) {
  return train_all(g_train_reduced, p, hp, global_seed, options, removed_nodes);
}

SignedGraph apply_removals(const SignedGraph& g_train, std::span<const UnlearnRequest> removals) {
  std::vector<std::uint64_t> dropped_pairs;
  std::vector<NodeId> dropped_nodes;
  for (const UnlearnRequest& r : removals) {
    if (r.kind == UnlearnRequest::Kind::kRemoveEdge) {
      dropped_pairs.push_back(pair_key(r.u, r.v));
    } else {
      dropped_nodes.push_back(r.u);
    }
  }
  std::sort(dropped_pairs.begin(), dropped_pairs.end());
  std::sort(dropped_nodes.begin(), dropped_nodes.end());
  std::vector<Edge> kept;
  kept.reserve(g_train.edge_count());
  for (const Edge& e : g_train.edges()) {
    if (std::binary_search(dropped_pairs.begin(), dropped_pairs.end(), pair_key(e))) continue;
    if (std::binary_search(dropped_nodes.begin(), dropped_nodes.end(), e.u) ||
        std::binary_search(dropped_nodes.begin(), dropped_nodes.end(), e.v)) {
      continue;
    }
    kept.push_back(e);
  }
  return SignedGraph(g_train.node_count(), std::move(kept));
}

}  // namespace sgu
