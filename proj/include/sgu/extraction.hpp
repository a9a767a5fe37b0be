#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sgu/signed_graph.hpp"

namespace sgu {

/// A pair of internally cohesive, mutually hostile node sets.
struct OppositiveGroup {
  std::vector<NodeId> p_side;  // ascending
  std::vector<NodeId> n_side;  // ascending
  /// x'(A+ - A-)x / |members| for the +1/-1 indicator x of the two sides.
  double cohesion = 0.0;

  std::size_t size() const { return p_side.size() + n_side.size(); }
  std::vector<NodeId> members() const;
  friend bool operator==(const OppositiveGroup&, const OppositiveGroup&) = default;
};

struct ExtractionParams {
  double tau = 0.3;
  std::size_t min_group = 3;
  /// 0 means "no cap" (effectively n).
  std::size_t max_groups = 0;
  double pi_tol = 1e-8;
  std::size_t pi_max_iter = 1000;
  double lambda_min = 1.0;

  void validate() const;
};

/// Exact cohesion of a (p_side, n_side) assignment.
double group_cohesion(const SignedGraph& g, std::span<const NodeId> p_side,
                      std::span<const NodeId> n_side);

/// One extraction round on the active subgraph: leading signed eigenvector,
/// threshold rounding at tau * max|x|, then greedy pruning of members whose
/// removal raises cohesion and restriction to the most cohesive connected
/// piece. Returns nullopt when the leading eigenvalue is <= lambda_min or the
/// surviving group has fewer than min_group members.
std::optional<OppositiveGroup> extract_one_group(const SignedGraph& g, std::span<const NodeId> active,
                                                 const ExtractionParams& params, std::uint64_t seed);

/// Repeated extraction with removal of extracted members. Nodes left over
/// become singleton groups, so the result partitions V.
std::vector<OppositiveGroup> extract_groups(const SignedGraph& g, const ExtractionParams& params,
                                            std::uint64_t seed);

}  // namespace sgu
