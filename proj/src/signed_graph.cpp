#include "sgu/signed_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>
#include <unordered_map>

#include "sgu/error.hpp"
#include "sgu/rng.hpp"

namespace sgu {

SignedGraph::SignedGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  for (Edge& e : edges_) {
    if (e.u == e.v) throw InvalidParamsError("self-loop on node " + std::to_string(e.u));
    if (e.u >= n_ || e.v >= n_) {
      throw InvalidParamsError("edge endpoint out of range (n=" + std::to_string(n_) + ")");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end());
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
      throw InvalidParamsError("pair {" + std::to_string(edges_[i].u) + "," +
                               std::to_string(edges_[i].v) + "} listed twice");
    }
  }

  std::vector<std::size_t> degree(n_, 0);
  positive_degree_.assign(n_, 0);
  for (const Edge& e : edges_) {
    ++degree[e.u];
    ++degree[e.v];
    if (e.sign == Sign::kPositive) {
      ++positive_count_;
      ++positive_degree_[e.u];
      ++positive_degree_[e.v];
    }
  }
  offsets_.assign(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_[n_]);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  // Edges are sorted by (u, v), so filling in this order leaves every
  // adjacency list sorted: the v-entries of node x (x as the larger
  // endpoint) all precede its u-entries.
  for (const Edge& e : edges_) adjacency_[cursor[e.v]++] = {e.u, e.sign};
  for (const Edge& e : edges_) adjacency_[cursor[e.u]++] = {e.v, e.sign};
}

std::vector<Edge> SignedGraph::positive_edges() const {
  std::vector<Edge> out;
  out.reserve(positive_count_);
  for (const Edge& e : edges_)
    if (e.sign == Sign::kPositive) out.push_back(e);
  return out;
}

std::vector<Edge> SignedGraph::negative_edges() const {
  std::vector<Edge> out;
  out.reserve(negative_edge_count());
  for (const Edge& e : edges_)
    if (e.sign == Sign::kNegative) out.push_back(e);
  return out;
}

std::size_t SignedGraph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t i = 0; i < n_; ++i) best = std::max(best, degree(static_cast<NodeId>(i)));
  return best;
}

std::optional<Sign> SignedGraph::sign_of(NodeId u, NodeId v) const {
  if (u >= n_ || v >= n_) return std::nullopt;
  auto adj = neighbors(u);
  auto it = std::lower_bound(adj.begin(), adj.end(), v,
                             [](const Neighbor& a, NodeId x) { return a.node < x; });
  if (it == adj.end() || it->node != v) return std::nullopt;
  return it->sign;
}

// ---------------------------------------------------------------------------

std::optional<EdgeFormat> parse_edge_format(const std::string& name) {
  if (name == "raw-rating") return EdgeFormat::kRawRating;
  if (name == "signed") return EdgeFormat::kSigned;
  return std::nullopt;
}

std::string to_string(EdgeFormat format) {
  return format == EdgeFormat::kRawRating ? "raw-rating" : "signed";
}

SignedGraph canonicalize(std::size_t n, std::span<const DirectedObservation> observations) {
  // Ordered map keeps the summation order per pair equal to input order and
  // the output order independent of hashing.
  std::map<std::uint64_t, double> sums;
  for (const auto& o : observations) {
    if (o.source == o.target) continue;
    sums[pair_key(o.source, o.target)] += o.value;
  }
  std::vector<Edge> edges;
  edges.reserve(sums.size());
  for (const auto& [key, sum] : sums) {
    if (sum == 0.0) continue;
    edges.push_back({static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu),
                     sum > 0.0 ? Sign::kPositive : Sign::kNegative});
  }
  return SignedGraph(n, std::move(edges));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty() && std::isfinite(out);
}

}  // namespace

LoadedGraph read_edge_list(std::istream& in, EdgeFormat format) {
  struct RawObservation {
    std::int64_t source, target;
    double value;
  };
  std::vector<RawObservation> raw;
  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    auto fields = split_fields(view);
    std::int64_t src = 0, dst = 0;
    if (first_data_line) {
      first_data_line = false;
      double probe;
      if (!parse_double(fields[0], probe)) continue;  // header
    }
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError("expected source,target,value[,timestamp]", line_no);
    }
    if (!parse_int(fields[0], src) || !parse_int(fields[1], dst)) {
      throw ParseError("node ids must be integers", line_no);
    }
    double value = 0.0;
    if (!parse_double(fields[2], value)) throw ParseError("value is not a number", line_no);
    if (value == 0.0) throw InvalidSignError("edge value 0 carries no sign", line_no);
    if (format == EdgeFormat::kSigned && value != 1.0 && value != -1.0) {
      throw InvalidSignError("signed format expects +1 or -1", line_no);
    }
    raw.push_back({src, dst, value});
  }
  if (raw.empty()) throw EmptyGraphError("edge list contains no edges");

  LoadedGraph out;
  for (const auto& r : raw) {
    out.original_ids.push_back(r.source);
    out.original_ids.push_back(r.target);
  }
  std::sort(out.original_ids.begin(), out.original_ids.end());
  out.original_ids.erase(std::unique(out.original_ids.begin(), out.original_ids.end()),
                         out.original_ids.end());
  std::unordered_map<std::int64_t, NodeId> compact;
  compact.reserve(out.original_ids.size());
  for (std::size_t i = 0; i < out.original_ids.size(); ++i) {
    compact.emplace(out.original_ids[i], static_cast<NodeId>(i));
  }
  std::vector<DirectedObservation> observations;
  observations.reserve(raw.size());
  for (const auto& r : raw) {
    observations.push_back({compact.at(r.source), compact.at(r.target), r.value});
  }
  out.graph = canonicalize(out.original_ids.size(), observations);
  return out;
}

LoadedGraph load_edge_list(const std::string& path, EdgeFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list '" + path + "'");
  return read_edge_list(in, format);
}

void write_graph_csv(std::ostream& out, const SignedGraph& g) {
  for (const Edge& e : g.edges()) {
    out << e.u << ',' << e.v << ',' << (e.sign == Sign::kPositive ? "+1" : "-1") << '\n';
  }
}

void write_node_mapping_csv(std::ostream& out, std::span<const std::int64_t> original_ids) {
  for (std::size_t i = 0; i < original_ids.size(); ++i) out << original_ids[i] << ',' << i << '\n';
}

// ---------------------------------------------------------------------------

void TriadCensus::add(int negative_edges) {
  switch (negative_edges) {
    case 0: ++t0; break;
    case 1: ++t1; break;
    case 2: ++t2; break;
    default: ++t3; break;
  }
}

TriadCensus& TriadCensus::operator+=(const TriadCensus& o) {
  t0 += o.t0;
  t1 += o.t1;
  t2 += o.t2;
  t3 += o.t3;
  return *this;
}

namespace {

TriadCensus census_masked(const SignedGraph& g, std::span<const NodeId> nodes,
                          const std::vector<char>& in_set) {
  TriadCensus census;
  for (NodeId u : nodes) {
    auto nu = g.neighbors(u);
    for (const Neighbor& nv : nu) {
      const NodeId v = nv.node;
      if (v <= u || !in_set[v]) continue;
      // Third vertex w > v, adjacent to both u and v.
      auto nvv = g.neighbors(v);
      auto a = std::upper_bound(nu.begin(), nu.end(), v,
                                [](NodeId x, const Neighbor& n) { return x < n.node; });
      auto b = std::upper_bound(nvv.begin(), nvv.end(), v,
                                [](NodeId x, const Neighbor& n) { return x < n.node; });
      while (a != nu.end() && b != nvv.end()) {
        if (a->node < b->node) {
          ++a;
        } else if (b->node < a->node) {
          ++b;
        } else {
          if (in_set[a->node]) {
            census.add(is_negative(nv.sign) + is_negative(a->sign) + is_negative(b->sign));
          }
          ++a;
          ++b;
        }
      }
    }
  }
  return census;
}

}  // namespace

TriadCensus triad_census(const SignedGraph& g, std::span<const NodeId> nodes) {
  std::vector<char> in_set(g.node_count(), 0);
  std::vector<NodeId> unique;
  unique.reserve(nodes.size());
  for (NodeId u : nodes) {
    if (u >= g.node_count()) throw InvalidParamsError("node id out of range");
    if (!in_set[u]) {
      in_set[u] = 1;
      unique.push_back(u);
    }
  }
  return census_masked(g, unique, in_set);
}

TriadCensus triad_census(const SignedGraph& g) {
  std::vector<NodeId> all(g.node_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
  std::vector<char> in_set(g.node_count(), 1);
  return census_masked(g, all, in_set);
}

double balance_ratio(const TriadCensus& census) {
  if (census.total() == 0) return 1.0;
  return static_cast<double>(census.balanced()) / static_cast<double>(census.total());
}

double balance_ratio(const SignedGraph& g, std::span<const NodeId> nodes) {
  return balance_ratio(triad_census(g, nodes));
}

// ---------------------------------------------------------------------------

InducedSubgraph induced_subgraph(const SignedGraph& g, std::span<const NodeId> nodes) {
  InducedSubgraph out;
  out.to_parent.assign(nodes.begin(), nodes.end());
  std::sort(out.to_parent.begin(), out.to_parent.end());
  out.to_parent.erase(std::unique(out.to_parent.begin(), out.to_parent.end()), out.to_parent.end());
  constexpr NodeId kAbsent = ~NodeId{0};
  std::vector<NodeId> local(g.node_count(), kAbsent);
  for (std::size_t i = 0; i < out.to_parent.size(); ++i) {
    if (out.to_parent[i] >= g.node_count()) throw InvalidParamsError("node id out of range");
    local[out.to_parent[i]] = static_cast<NodeId>(i);
  }
  std::vector<Edge> edges;
  for (NodeId u : out.to_parent) {
    for (const Neighbor& nb : g.neighbors(u)) {
      if (nb.node > u && local[nb.node] != kAbsent) edges.push_back({local[u], local[nb.node], nb.sign});
    }
  }
  out.graph = SignedGraph(out.to_parent.size(), std::move(edges));
  return out;
}

// ---------------------------------------------------------------------------

void SsbmParams::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (blocks < 1) throw InvalidParamsError("ssbm: blocks must be >= 1");
  if (n < blocks) throw InvalidParamsError("ssbm: n must be >= blocks");
  if (!prob(p_in_pos) || !prob(p_in_neg) || !prob(p_out_pos) || !prob(p_out_neg)) {
    throw InvalidParamsError("ssbm: probabilities must lie in [0,1]");
  }
  if (p_in_pos + p_in_neg > 1.0 || p_out_pos + p_out_neg > 1.0) {
    throw InvalidParamsError("ssbm: positive and negative probabilities must sum to <= 1");
  }
}

std::size_t ssbm_block_of(const SsbmParams& p, NodeId node) {
  return static_cast<std::size_t>(node) * p.blocks / p.n;
}

SignedGraph generate_polarized_ssbm(const SsbmParams& p) {
  p.validate();
  Rng rng(derive_seed(p.seed, "ssbm"));
  std::vector<Edge> edges;
  for (NodeId u = 0; u < p.n; ++u) {
    const std::size_t bu = ssbm_block_of(p, u);
    for (NodeId v = u + 1; v < p.n; ++v) {
      const bool same = bu == ssbm_block_of(p, v);
      const double pp = same ? p.p_in_pos : p.p_out_pos;
      const double pn = same ? p.p_in_neg : p.p_out_neg;
      const double r = rng.uniform();
      if (r < pp) {
        edges.push_back({u, v, Sign::kPositive});
      } else if (r < pp + pn) {
        edges.push_back({u, v, Sign::kNegative});
      }
    }
  }
  return SignedGraph(p.n, std::move(edges));
}

}  // namespace sgu
