#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sgu {

using NodeId = std::uint32_t;

enum class Sign : std::int8_t { kNegative = -1, kPositive = 1 };

constexpr int to_int(Sign s) { return static_cast<int>(s); }
constexpr bool is_negative(Sign s) { return s == Sign::kNegative; }

/// Undirected signed edge, always stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  Sign sign = Sign::kPositive;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// 64-bit key identifying an unordered pair, independent of sign.
constexpr std::uint64_t pair_key(NodeId a, NodeId b) {
  const NodeId lo = a < b ? a : b;
  const NodeId hi = a < b ? b : a;
  return (static_cast<std::uint64_t>(lo) << 32) | hi;
}
constexpr std::uint64_t pair_key(const Edge& e) { return pair_key(e.u, e.v); }

struct Neighbor {
  NodeId node;
  Sign sign;
};

/// Immutable undirected signed graph on nodes 0..n-1 with disjoint positive
/// and negative edge sets. Adjacency is kept as a CSR index sorted by
/// neighbor id so that triangle enumeration is a sorted-list intersection.
class SignedGraph {
 public:
  SignedGraph() = default;

  /// Validates the edge list: endpoints < n, no self-loops, no pair listed
  /// twice. Edges with u > v are reoriented.
  SignedGraph(std::size_t n, std::vector<Edge> edges);

  std::size_t node_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t positive_edge_count() const { return positive_count_; }
  std::size_t negative_edge_count() const { return edges_.size() - positive_count_; }

  /// All edges, sorted lexicographically by (u, v).
  std::span<const Edge> edges() const { return edges_; }
  std::vector<Edge> positive_edges() const;
  std::vector<Edge> negative_edges() const;

  std::span<const Neighbor> neighbors(NodeId u) const {
    return {adjacency_.data() + offsets_[u], adjacency_.data() + offsets_[u + 1]};
  }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }
  std::size_t positive_degree(NodeId u) const { return positive_degree_[u]; }
  std::size_t negative_degree(NodeId u) const { return degree(u) - positive_degree_[u]; }
  std::size_t max_degree() const;

  std::optional<Sign> sign_of(NodeId u, NodeId v) const;
  bool has_edge(NodeId u, NodeId v) const { return sign_of(u, v).has_value(); }

  friend bool operator==(const SignedGraph& a, const SignedGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::size_t positive_count_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
  std::vector<std::uint32_t> positive_degree_;
};

// ---------------------------------------------------------------------------
// Ingestion

enum class EdgeFormat { kRawRating, kSigned };

std::optional<EdgeFormat> parse_edge_format(const std::string& name);
std::string to_string(EdgeFormat format);

/// One directed observation before canonicalization. `value` is the raw
/// rating, or +-1 for signed input.
struct DirectedObservation {
  NodeId source;
  NodeId target;
  double value;
};

/// Collapses a directed multiset into an undirected signed graph: the values
/// of every unordered pair are summed, sum > 0 gives a positive edge, sum < 0
/// a negative one, and an exact tie drops the pair. Self-loops are dropped.
SignedGraph canonicalize(std::size_t n, std::span<const DirectedObservation> observations);

struct LoadedGraph {
  SignedGraph graph;
  /// original_ids[compact] = id as written in the file; ascending.
  std::vector<std::int64_t> original_ids;
};

/// Reads `source,target,value[,timestamp]` lines. A first line whose first
/// field is not numeric is treated as a header.
LoadedGraph read_edge_list(std::istream& in, EdgeFormat format);
LoadedGraph load_edge_list(const std::string& path, EdgeFormat format);

/// `u,v,sign` with u < v, sorted, sign in {+1,-1}; no header.
void write_graph_csv(std::ostream& out, const SignedGraph& g);
/// `original_id,compact_id`, one line per node.
void write_node_mapping_csv(std::ostream& out, std::span<const std::int64_t> original_ids);

// ---------------------------------------------------------------------------
// Triads

/// Triangle counts by number of negative edges.
struct TriadCensus {
  std::uint64_t t0 = 0;
  std::uint64_t t1 = 0;
  std::uint64_t t2 = 0;
  std::uint64_t t3 = 0;

  std::uint64_t total() const { return t0 + t1 + t2 + t3; }
  std::uint64_t balanced() const { return t0 + t2; }

  void add(int negative_edges);
  TriadCensus& operator+=(const TriadCensus& o);
  friend TriadCensus operator+(TriadCensus a, const TriadCensus& b) { return a += b; }
  friend bool operator==(const TriadCensus&, const TriadCensus&) = default;
};

/// Census of the subgraph induced by `nodes` (duplicates ignored).
TriadCensus triad_census(const SignedGraph& g, std::span<const NodeId> nodes);
TriadCensus triad_census(const SignedGraph& g);

/// Fraction of balanced triangles; 1.0 for a triangle-free census.
double balance_ratio(const TriadCensus& census);
double balance_ratio(const SignedGraph& g, std::span<const NodeId> nodes);

// ---------------------------------------------------------------------------
// Subgraphs

struct InducedSubgraph {
  SignedGraph graph;
  /// to_parent[local] = node id in the parent graph; ascending.
  std::vector<NodeId> to_parent;
};

InducedSubgraph induced_subgraph(const SignedGraph& g, std::span<const NodeId> nodes);

// ---------------------------------------------------------------------------
// Synthetic polarized signed stochastic block model

struct SsbmParams {
  std::size_t n = 1000;
  std::size_t blocks = 10;
  double p_in_pos = 0.1;
  double p_in_neg = 0.005;
  double p_out_pos = 0.005;
  double p_out_neg = 0.05;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Nodes are split into contiguous, near-equal blocks.
std::size_t ssbm_block_of(const SsbmParams& p, NodeId node);

/// Every unordered pair draws one uniform r: r < p_pos gives a positive edge,
/// else r < p_pos + p_neg a negative one.
SignedGraph generate_polarized_ssbm(const SsbmParams& p);

}  // namespace sgu
