#include "sgu/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include "sgu/error.hpp"
#include "sgu/rng.hpp"
#include "sgu/spectral.hpp"

namespace sgu {

Partition make_partition(const SignedGraph& g, std::span<const std::uint32_t> labels,
                         double delta_final) {
  if (labels.size() != g.node_count()) {
    throw ValidationError("partition labels do not cover the graph's nodes");
  }
  // First appearance in node order is the ordering by smallest member.
  std::unordered_map<std::uint32_t, ShardId> dense;
  Partition p;
  p.assignment.resize(labels.size());
  for (std::size_t u = 0; u < labels.size(); ++u) {
    auto [it, inserted] = dense.emplace(labels[u], static_cast<ShardId>(dense.size()));
    if (inserted) p.clusters.emplace_back();
    p.assignment[u] = it->second;
    p.clusters[it->second].members.push_back(static_cast<NodeId>(u));
  }
  p.k = p.clusters.size();
  p.delta_final = delta_final;
  for (const Edge& e : g.edges()) {
    if (p.assignment[e.u] == p.assignment[e.v]) ++p.clusters[p.assignment[e.u]].intra_edges;
  }
  for (Cluster& c : p.clusters) c.census = triad_census(g, c.members);
  return p;
}

void validate_partition(const SignedGraph& g, const Partition& p) {
  if (p.assignment.size() != g.node_count()) {
    throw ValidationError("partition covers " + std::to_string(p.assignment.size()) +
                          " nodes, graph has " + std::to_string(g.node_count()));
  }
  if (p.clusters.size() != p.k) throw ValidationError("partition: cluster list size != k");
  std::vector<std::vector<NodeId>> expected(p.k);
  for (std::size_t u = 0; u < p.assignment.size(); ++u) {
    if (p.assignment[u] >= p.k) throw ValidationError("partition: shard id out of range");
    expected[p.assignment[u]].push_back(static_cast<NodeId>(u));
  }
  std::vector<std::size_t> intra(p.k, 0);
  for (const Edge& e : g.edges()) {
    if (p.assignment[e.u] == p.assignment[e.v]) ++intra[p.assignment[e.u]];
  }
  for (std::size_t s = 0; s < p.k; ++s) {
    const Cluster& c = p.clusters[s];
    if (c.members.empty()) throw ValidationError("partition: empty shard " + std::to_string(s));
    if (c.members != expected[s]) throw ValidationError("partition: members disagree with assignment");
    if (c.intra_edges != intra[s]) throw ValidationError("partition: stale intra-edge count");
    if (!(c.census == triad_census(g, c.members))) throw ValidationError("partition: stale census");
  }
}

void ClusteringParams::validate() const {
  if (k < 1) throw InvalidParamsError("clustering: k must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidParamsError("clustering: alpha must lie in [0,1]");
  if (!(delta >= 0.0)) throw InvalidParamsError("clustering: delta must be >= 0");
}

namespace {

std::vector<char> mask_of(const SignedGraph& g, std::span<const NodeId> nodes) {
  std::vector<char> mask(g.node_count(), 0);
  for (NodeId u : nodes) {
    if (u >= g.node_count()) throw InvalidParamsError("node id out of range");
    mask[u] = 1;
  }
  return mask;
}

void require_disjoint(const SignedGraph& g, std::span<const NodeId> ci, std::span<const NodeId> cj) {
  const auto mi = mask_of(g, ci);
  for (NodeId u : cj) {
    if (u >= g.node_count()) throw InvalidParamsError("node id out of range");
    if (mi[u]) throw InvalidParamsError("cluster sets overlap at node " + std::to_string(u));
  }
}

}  // namespace

double ratio_cut(const SignedGraph& g, std::span<const NodeId> ci, std::span<const NodeId> cj) {
  if (ci.empty() || cj.empty()) throw InvalidParamsError("ratio_cut: empty cluster");
  require_disjoint(g, ci, cj);
  const auto mj = mask_of(g, cj);
  std::size_t cut = 0;
  for (NodeId u : ci)
    for (const Neighbor& nb : g.neighbors(u)) cut += mj[nb.node];
  const double c = static_cast<double>(cut);
  return c / static_cast<double>(ci.size()) + c / static_cast<double>(cj.size());
}

double balance_ratio_merged(const SignedGraph& g, std::span<const NodeId> ci,
                            std::span<const NodeId> cj) {
  require_disjoint(g, ci, cj);
  std::vector<NodeId> merged(ci.begin(), ci.end());
  merged.insert(merged.end(), cj.begin(), cj.end());
  return balance_ratio(g, merged);
}

double similarity_score(double ratio_cut_value, double balance_ratio_value, double alpha,
                        double rc_norm) {
  return alpha * (ratio_cut_value / rc_norm) + (1.0 - alpha) * balance_ratio_value;
}

double similarity(const SignedGraph& g, std::span<const NodeId> ci, std::span<const NodeId> cj,
                  double alpha, double rc_norm) {
  if (!(rc_norm > 0.0)) throw InvalidParamsError("similarity: rc_norm must be positive");
  return similarity_score(ratio_cut(g, ci, cj), balance_ratio_merged(g, ci, cj), alpha, rc_norm);
}

std::size_t edge_cap(std::size_t edge_count, std::size_t k, double delta) {
  const long double raw = (1.0L + delta) * static_cast<long double>(edge_count) / k;
  // Guard against 1.25 * 400 / 5 landing a hair above an integer.
  const long double nearest = std::round(raw);
  if (std::abs(raw - nearest) < 1e-9L) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(raw));
}

// ---------------------------------------------------------------------------

namespace {

struct PairStats {
  std::size_t cut = 0;
  TriadCensus cross;  // triangles spanning exactly these two clusters
};

struct Slot {
  std::vector<NodeId> members;
  std::size_t intra = 0;
  TriadCensus census;
  bool alive = true;
  NodeId min_id() const { return members.front(); }
};

struct Candidate {
  std::uint32_t a = 0, b = 0;
  std::size_t cut = 0;
  double ratio_cut = 0.0;
  double balance = 1.0;
  double score = 0.0;
  std::size_t size = 0;
  NodeId first = 0, second = 0;  // smaller / larger of the two minimum ids
};

/// True when x should be preferred over y.
bool better(const Candidate& x, const Candidate& y) {
  if (x.score != y.score) return x.score > y.score;
  if (x.size != y.size) return x.size < y.size;
  if (x.first != y.first) return x.first < y.first;
  return x.second < y.second;
}

/// Iterates the triangles (u < v < w) of g.
template <class Fn>
void for_each_triangle(const SignedGraph& g, Fn&& fn) {
  for (NodeId u = 0; u < g.node_count(); ++u) {
    auto nu = g.neighbors(u);
    for (const Neighbor& nv : nu) {
      if (nv.node <= u) continue;
      auto nvv = g.neighbors(nv.node);
      auto a = std::upper_bound(nu.begin(), nu.end(), nv.node,
                                [](NodeId x, const Neighbor& n) { return x < n.node; });
      auto b = std::upper_bound(nvv.begin(), nvv.end(), nv.node,
                                [](NodeId x, const Neighbor& n) { return x < n.node; });
      while (a != nu.end() && b != nvv.end()) {
        if (a->node < b->node) {
          ++a;
        } else if (b->node < a->node) {
          ++b;
        } else {
          fn(u, nv.node, a->node, is_negative(nv.sign) + is_negative(a->sign) + is_negative(b->sign));
          ++a;
          ++b;
        }
      }
    }
  }
}

}  // namespace

AgglomerationResult agglomerate(const SignedGraph& g, std::span<const OppositiveGroup> groups,
                                const ClusteringParams& params, const AgglomerationOptions& options) {
  params.validate();
  const std::size_t n = g.node_count();
  if (params.k > n) throw InvalidParamsError("clustering: k exceeds node count");

  constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> owner(n, kUnassigned);
  std::vector<Slot> slots;
  slots.reserve(groups.size());
  for (const OppositiveGroup& grp : groups) {
    Slot s;
    s.members = grp.members();
    if (s.members.empty()) throw InvalidParamsError("clustering: empty group");
    for (NodeId u : s.members) {
      if (u >= n) throw InvalidParamsError("clustering: group node out of range");
      if (owner[u] != kUnassigned) throw InvalidParamsError("clustering: groups overlap");
      owner[u] = static_cast<std::uint32_t>(slots.size());
    }
    slots.push_back(std::move(s));
  }
  for (std::size_t u = 0; u < n; ++u) {
    if (owner[u] == kUnassigned) throw InvalidParamsError("clustering: groups do not cover V");
  }
  if (slots.size() < params.k) {
    throw InfeasibleKError("clustering: " + std::to_string(slots.size()) +
                           " initial groups, fewer than k=" + std::to_string(params.k));
  }

  std::vector<std::unordered_map<std::uint32_t, PairStats>> adj(slots.size());
  for (const Edge& e : g.edges()) {
    const auto a = owner[e.u], b = owner[e.v];
    if (a == b) {
      ++slots[a].intra;
    } else {
      ++adj[a][b].cut;
      ++adj[b][a].cut;
    }
  }
  for_each_triangle(g, [&](NodeId u, NodeId v, NodeId w, int neg) {
    const auto a = owner[u], b = owner[v], c = owner[w];
    if (a == b && b == c) {
      slots[a].census.add(neg);
    } else if (a == b || b == c || a == c) {
      const auto x = a == b ? a : c;  // the cluster holding two corners
      const auto y = a == b ? c : (b == c ? a : b);
      adj[x][y].cross.add(neg);
      adj[y][x].cross.add(neg);
    }
  });

  AgglomerationResult result;
  double delta = params.delta;
  std::size_t largest_intra = 0;
  for (const Slot& s : slots) largest_intra = std::max(largest_intra, s.intra);
  while (edge_cap(g.edge_count(), params.k, delta) < largest_intra) delta += 0.25;
  std::size_t alive = slots.size();
  std::size_t round = 0;
  std::vector<Candidate> candidates;
  while (alive > params.k) {
    const std::size_t cap = edge_cap(g.edge_count(), params.k, delta);
    candidates.clear();
    auto consider = [&](std::uint32_t a, std::uint32_t b, const PairStats* ps) {
      const std::size_t cut = ps ? ps->cut : 0;
      if (slots[a].intra + slots[b].intra + cut > cap) return;
      Candidate c;
      c.a = a;
      c.b = b;
      c.cut = cut;
      const double dc = static_cast<double>(cut);
      c.ratio_cut = dc / static_cast<double>(slots[a].members.size()) +
                    dc / static_cast<double>(slots[b].members.size());
      TriadCensus merged = slots[a].census + slots[b].census;
      if (ps) merged += ps->cross;
      c.balance = balance_ratio(merged);
      c.size = slots[a].members.size() + slots[b].members.size();
      c.first = std::min(slots[a].min_id(), slots[b].min_id());
      c.second = std::max(slots[a].min_id(), slots[b].min_id());
      candidates.push_back(c);
    };
    for (std::uint32_t a = 0; a < slots.size(); ++a) {
      if (!slots[a].alive) continue;
      for (const auto& [b, ps] : adj[a]) {
        if (b > a) consider(a, b, &ps);
      }
    }
    if (candidates.empty()) {
      for (std::uint32_t a = 0; a < slots.size(); ++a) {
        if (!slots[a].alive) continue;
        for (std::uint32_t b = a + 1; b < slots.size(); ++b) {
          if (!slots[b].alive) continue;
          auto it = adj[a].find(b);
          consider(a, b, it == adj[a].end() ? nullptr : &it->second);
        }
      }
    }
    if (candidates.empty()) {
      delta += 0.25;
      continue;
    }
    double rc_norm = 0.0;
    for (const Candidate& c : candidates) rc_norm = std::max(rc_norm, c.ratio_cut);
    if (rc_norm <= 0.0) rc_norm = 1.0;
    const Candidate* best = nullptr;
    for (Candidate& c : candidates) {
      c.score = similarity_score(c.ratio_cut, c.balance, params.alpha, rc_norm);
      if (!best || better(c, *best)) best = &c;
    }

    std::uint32_t keep = best->a, drop = best->b;
    if (slots[drop].min_id() < slots[keep].min_id()) std::swap(keep, drop);

    if (options.record_merges) {
      MergeRecord rec;
      rec.round = round;
      rec.merged_a = slots[keep].members;
      rec.merged_b = slots[drop].members;
      rec.similarity = best->score;
      rec.delta = delta;
      if (options.trace_candidates) {
        for (const Candidate& c : candidates) {
          rec.candidates.emplace_back(slots[c.a].members, slots[c.b].members);
          rec.candidate_scores.push_back(c.score);
        }
      }
      result.merges.push_back(std::move(rec));
    }

    // Triangles with one corner in each of keep, drop and a third cluster c
    // become two-cluster triangles of (keep u drop, c). Each has exactly one
    // keep-drop edge, so scanning those edges counts it once.
    std::map<std::uint32_t, TriadCensus> three_way;
    const std::uint32_t small = slots[keep].members.size() <= slots[drop].members.size() ? keep : drop;
    const std::uint32_t other = small == keep ? drop : keep;
    for (NodeId u : slots[small].members) {
      auto nu = g.neighbors(u);
      for (const Neighbor& nv : nu) {
        if (owner[nv.node] != other) continue;
        auto nvv = g.neighbors(nv.node);
        auto a = nu.begin();
        auto b = nvv.begin();
        while (a != nu.end() && b != nvv.end()) {
          if (a->node < b->node) {
            ++a;
          } else if (b->node < a->node) {
            ++b;
          } else {
            const auto c = owner[a->node];
            if (c != keep && c != drop) {
              three_way[c].add(is_negative(nv.sign) + is_negative(a->sign) + is_negative(b->sign));
            }
            ++a;
            ++b;
          }
        }
      }
    }

    PairStats joined;
    if (auto it = adj[keep].find(drop); it != adj[keep].end()) joined = it->second;
    slots[keep].intra += slots[drop].intra + joined.cut;
    slots[keep].census += slots[drop].census;
    slots[keep].census += joined.cross;
    adj[keep].erase(drop);
    for (auto& [c, ps] : adj[drop]) {
      if (c == keep) continue;
      PairStats& kc = adj[keep][c];
      kc.cut += ps.cut;
      kc.cross += ps.cross;
      PairStats& ck = adj[c][keep];
      ck.cut += ps.cut;
      ck.cross += ps.cross;
      adj[c].erase(drop);
    }
    adj[drop].clear();
    for (const auto& [c, tri] : three_way) {
      adj[keep][c].cross += tri;
      adj[c][keep].cross += tri;
    }
    for (NodeId u : slots[drop].members) owner[u] = keep;
    std::vector<NodeId> merged;
    merged.reserve(slots[keep].members.size() + slots[drop].members.size());
    std::merge(slots[keep].members.begin(), slots[keep].members.end(), slots[drop].members.begin(),
               slots[drop].members.end(), std::back_inserter(merged));
    slots[keep].members = std::move(merged);
    slots[drop].members.clear();
    slots[drop].members.shrink_to_fit();
    slots[drop].alive = false;
    --alive;
    ++round;
  }

  result.partition = make_partition(g, owner, delta);
  return result;
}

namespace {

// Leading-eigenvector sign split of one group; median split when the signs
// do not separate it.
std::pair<OppositiveGroup, OppositiveGroup> split_group(const SignedGraph& g, const OppositiveGroup& target,
                                                        std::uint64_t seed) {
  const std::vector<NodeId> members = target.members();
  const auto pi = signed_power_iteration(g, members, 1e-10, 2000, seed);
  std::vector<NodeId> left, right;
  for (std::size_t i = 0; i < pi.nodes.size(); ++i) {
    (pi.x[i] >= 0.0 ? left : right).push_back(pi.nodes[i]);
  }
  if (!pi.has_structure || left.empty() || right.empty()) {
    std::vector<std::size_t> order(pi.nodes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pi.x[a] > pi.x[b]; });
    left.clear();
    right.clear();
    for (std::size_t r = 0; r < order.size(); ++r) {
      (r < order.size() / 2 ? left : right).push_back(pi.nodes[order[r]]);
    }
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
  }
  auto restrict = [&](const std::vector<NodeId>& part) {
    OppositiveGroup out;
    for (NodeId u : part) {
      const bool on_p = std::binary_search(target.p_side.begin(), target.p_side.end(), u);
      (on_p ? out.p_side : out.n_side).push_back(u);
    }
    out.cohesion = group_cohesion(g, out.p_side, out.n_side);
    return out;
  };
  return {restrict(left), restrict(right)};
}

}  // namespace

std::vector<OppositiveGroup> bisect_until(const SignedGraph& g, std::vector<OppositiveGroup> groups,
                                          std::size_t k, std::uint64_t seed) {
  if (k > g.node_count()) throw InvalidParamsError("clustering: k exceeds node count");
  std::size_t split_round = 0;
  while (groups.size() < k) {
    std::size_t largest = 0;
    for (std::size_t i = 1; i < groups.size(); ++i) {
      const auto si = groups[i].size(), sl = groups[largest].size();
      if (si > sl || (si == sl && groups[i].members().front() < groups[largest].members().front())) {
        largest = i;
      }
    }
    if (groups[largest].size() < 2) throw InfeasibleKError("clustering: cannot split below singletons");
    auto [left, right] = split_group(g, groups[largest], derive_seed(seed, "bisect", split_round++));
    groups[largest] = std::move(left);
    groups.push_back(std::move(right));
  }
  return groups;
}

std::size_t intra_edge_count(const SignedGraph& g, const std::vector<NodeId>& sorted_members) {
  std::size_t count = 0;
  for (NodeId u : sorted_members) {
    for (const Neighbor& nb : g.neighbors(u)) {
      if (nb.node > u && std::binary_search(sorted_members.begin(), sorted_members.end(), nb.node)) ++count;
    }
  }
  return count;
}

std::vector<OppositiveGroup> bisect_oversized(const SignedGraph& g, std::vector<OppositiveGroup> groups,
                                              std::size_t cap, std::uint64_t seed) {
  std::size_t split_round = 0;
  for (std::size_t i = 0; i < groups.size();) {
    if (groups[i].size() < 2 || intra_edge_count(g, groups[i].members()) <= cap) {
      ++i;
      continue;
    }
    auto [left, right] = split_group(g, groups[i], derive_seed(seed, "bisect-cap", split_round++));
    groups[i] = std::move(left);
    groups.push_back(std::move(right));
  }
  return groups;
}

Partition random_balanced_partition(const SignedGraph& g, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > g.node_count()) throw InvalidParamsError("random partition: need 1 <= k <= n");
  std::vector<NodeId> order(g.node_count());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "random-partition"));
  rng.shuffle(order);
  std::vector<std::uint32_t> labels(g.node_count());
  for (std::size_t i = 0; i < order.size(); ++i) labels[order[i]] = static_cast<std::uint32_t>(i % k);
  return make_partition(g, labels);
}

PartitionDiagnostics partition_diagnostics(const SignedGraph& g, const Partition& p) {
  PartitionDiagnostics d;
  d.total_edges = g.edge_count();
  d.shards.resize(p.k);
  for (std::size_t s = 0; s < p.k; ++s) d.shards[s].nodes = p.clusters[s].members.size();
  for (const Edge& e : g.edges()) {
    const ShardId a = p.assignment[e.u];
    if (a != p.assignment[e.v]) {
      ++d.cut_edges;
      continue;
    }
    ++d.shards[a].intra_edges;
    if (e.sign == Sign::kPositive) ++d.shards[a].positive_edges;
  }
  d.intra_edges = d.total_edges - d.cut_edges;
  std::size_t max_intra = 0;
  double br_sum = 0.0;
  d.min_balance_ratio = 1.0;
  for (std::size_t s = 0; s < p.k; ++s) {
    ShardDiagnostics& sd = d.shards[s];
    if (sd.intra_edges > 0) {
      sd.positive_fraction = static_cast<double>(sd.positive_edges) / static_cast<double>(sd.intra_edges);
    }
    const TriadCensus census = triad_census(g, p.clusters[s].members);
    sd.triangles = census.total();
    sd.balance_ratio = balance_ratio(census);
    br_sum += sd.balance_ratio;
    d.min_balance_ratio = std::min(d.min_balance_ratio, sd.balance_ratio);
    max_intra = std::max(max_intra, sd.intra_edges);
  }
  d.mean_balance_ratio = p.k ? br_sum / static_cast<double>(p.k) : 1.0;
  const double mean_intra = p.k ? static_cast<double>(d.intra_edges) / static_cast<double>(p.k) : 0.0;
  d.max_mean_intra_ratio = mean_intra > 0.0 ? static_cast<double>(max_intra) / mean_intra : 0.0;
  return d;
}

}  // namespace sgu
