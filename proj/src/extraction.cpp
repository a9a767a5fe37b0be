#include "sgu/extraction.hpp"

#include <algorithm>
#include <cmath>

#include "sgu/error.hpp"
#include "sgu/rng.hpp"
#include "sgu/spectral.hpp"

namespace sgu {

std::vector<NodeId> OppositiveGroup::members() const {
  std::vector<NodeId> all(p_side);
  all.insert(all.end(), n_side.begin(), n_side.end());
  std::sort(all.begin(), all.end());
  return all;
}

void ExtractionParams::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidParamsError("extraction: tau must lie in (0,1]");
  if (!(pi_tol > 0.0)) throw InvalidParamsError("extraction: pi_tol must be positive");
  if (pi_max_iter == 0) throw InvalidParamsError("extraction: pi_max_iter must be positive");
}

double group_cohesion(const SignedGraph& g, std::span<const NodeId> p_side,
                      std::span<const NodeId> n_side) {
  std::vector<int> side(g.node_count(), 0);
  for (NodeId u : p_side) side[u] = 1;
  for (NodeId u : n_side) side[u] = -1;
  std::int64_t quad = 0;
  for (const Edge& e : g.edges()) quad += 2 * to_int(e.sign) * side[e.u] * side[e.v];
  const std::size_t m = p_side.size() + n_side.size();
  return m == 0 ? 0.0 : static_cast<double>(quad) / static_cast<double>(m);
}

namespace {

/// Working state for pruning: members in ascending id order, their sides, and
/// each member's contribution c_i = sum_{j in M, j~i} s_ij side_i side_j.
/// The quadratic form is S = sum_i c_i and cohesion is S / |M|.
struct PruneState {
  std::vector<NodeId> nodes;
  std::vector<int> side;
  std::vector<char> alive;
  std::vector<std::int64_t> contrib;
  std::int64_t quad = 0;
  std::size_t count = 0;
};

void init_contributions(const SignedGraph& g, PruneState& st, std::vector<std::int32_t>& local) {
  st.contrib.assign(st.nodes.size(), 0);
  st.quad = 0;
  st.count = 0;
  for (std::size_t i = 0; i < st.nodes.size(); ++i) {
    if (!st.alive[i]) continue;
    ++st.count;
    for (const Neighbor& nb : g.neighbors(st.nodes[i])) {
      const std::int32_t j = local[nb.node];
      if (j < 0 || !st.alive[j]) continue;
      st.contrib[i] += to_int(nb.sign) * st.side[i] * st.side[j];
    }
    st.quad += st.contrib[i];
  }
}

void greedy_prune(const SignedGraph& g, PruneState& st, const std::vector<std::int32_t>& local) {
  while (st.count > 1) {
    std::size_t best = st.nodes.size();
    for (std::size_t i = 0; i < st.nodes.size(); ++i) {
      if (st.alive[i] && (best == st.nodes.size() || st.contrib[i] < st.contrib[best])) best = i;
    }
    const std::int64_t next_quad = st.quad - 2 * st.contrib[best];
    const auto m = static_cast<std::int64_t>(st.count);
    // next_quad / (m-1) > quad / m, exactly
    if (next_quad * m <= st.quad * (m - 1)) break;
    st.alive[best] = 0;
    for (const Neighbor& nb : g.neighbors(st.nodes[best])) {
      const std::int32_t j = local[nb.node];
      if (j < 0 || !st.alive[j]) continue;
      st.contrib[j] -= to_int(nb.sign) * st.side[best] * st.side[j];
    }
    st.quad = next_quad;
    --st.count;
  }
}

/// Keeps only the connected piece (edges of either sign) of highest cohesion.
/// Returns true when something was dropped.
bool restrict_to_best_component(const SignedGraph& g, PruneState& st,
                                const std::vector<std::int32_t>& local) {
  const std::size_t n = st.nodes.size();
  std::vector<std::int32_t> comp(n, -1);
  struct Piece {
    std::int64_t quad = 0;
    std::int64_t size = 0;
  };
  std::vector<Piece> pieces;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (!st.alive[s] || comp[s] >= 0) continue;
    const auto id = static_cast<std::int32_t>(pieces.size());
    pieces.push_back({});
    comp[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      pieces[id].quad += st.contrib[i];
      ++pieces[id].size;
      for (const Neighbor& nb : g.neighbors(st.nodes[i])) {
        const std::int32_t j = local[nb.node];
        if (j < 0 || !st.alive[j] || comp[j] >= 0) continue;
        comp[j] = id;
        stack.push_back(static_cast<std::size_t>(j));
      }
    }
  }
  if (pieces.size() <= 1) return false;
  // Pieces are numbered by their smallest member, so strict improvement keeps
  // the lowest-id piece on ties.
  std::size_t best = 0;
  for (std::size_t p = 1; p < pieces.size(); ++p) {
    if (pieces[p].quad * pieces[best].size > pieces[best].quad * pieces[p].size) best = p;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (st.alive[i] && comp[i] != static_cast<std::int32_t>(best)) st.alive[i] = 0;
  }
  st.quad = pieces[best].quad;
  st.count = static_cast<std::size_t>(pieces[best].size);
  return true;
}

}  // namespace

std::optional<OppositiveGroup> extract_one_group(const SignedGraph& g, std::span<const NodeId> active,
                                                 const ExtractionParams& params, std::uint64_t seed) {
  params.validate();
  const PowerIterationResult pi =
      signed_power_iteration(g, active, params.pi_tol, params.pi_max_iter, seed);
  if (!pi.has_structure || pi.lambda <= params.lambda_min) return std::nullopt;

  double max_abs = 0.0;
  for (double v : pi.x) max_abs = std::max(max_abs, std::abs(v));
  const double cutoff = params.tau * max_abs;

  PruneState st;
  for (std::size_t i = 0; i < pi.nodes.size(); ++i) {
    if (std::abs(pi.x[i]) >= cutoff && pi.x[i] != 0.0) {
      st.nodes.push_back(pi.nodes[i]);
      st.side.push_back(pi.x[i] > 0.0 ? 1 : -1);
    }
  }
  st.alive.assign(st.nodes.size(), 1);
  std::vector<std::int32_t> local(g.node_count(), -1);
  for (std::size_t i = 0; i < st.nodes.size(); ++i) local[st.nodes[i]] = static_cast<std::int32_t>(i);

  init_contributions(g, st, local);
  do {
    greedy_prune(g, st, local);
  } while (restrict_to_best_component(g, st, local));

  if (st.count < params.min_group) return std::nullopt;
  OppositiveGroup group;
  for (std::size_t i = 0; i < st.nodes.size(); ++i) {
    if (!st.alive[i]) continue;
    (st.side[i] > 0 ? group.p_side : group.n_side).push_back(st.nodes[i]);
  }
  group.cohesion = static_cast<double>(st.quad) / static_cast<double>(st.count);
  return group;
}

std::vector<OppositiveGroup> extract_groups(const SignedGraph& g, const ExtractionParams& params,
                                            std::uint64_t seed) {
  params.validate();
  if (g.node_count() == 0) throw EmptyGraphError("extraction: graph has no nodes");
  const std::size_t cap = params.max_groups == 0 ? g.node_count() : params.max_groups;

  std::vector<NodeId> active(g.node_count());
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = static_cast<NodeId>(i);
  std::vector<OppositiveGroup> groups;
  std::vector<char> taken(g.node_count(), 0);
  while (groups.size() < cap && !active.empty()) {
    auto group = extract_one_group(g, active, params, derive_seed(seed, "extract", groups.size()));
    if (!group) break;
    for (NodeId u : group->p_side) taken[u] = 1;
    for (NodeId u : group->n_side) taken[u] = 1;
    std::erase_if(active, [&](NodeId u) { return taken[u] != 0; });
    groups.push_back(std::move(*group));
  }
  for (NodeId u : active) groups.push_back({{u}, {}, 0.0});
  return groups;
}

}  // namespace sgu
