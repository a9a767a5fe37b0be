#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgu/signed_graph.hpp"

namespace sgu {

struct PowerIterationResult {
  /// Rayleigh quotient of `x` under the signed adjacency A+ - A-.
  double lambda = 0.0;
  /// Unit vector indexed like `nodes`.
  std::vector<double> x;
  /// The active nodes, ascending.
  std::vector<NodeId> nodes;
  std::size_t iterations = 0;
  bool converged = false;
  /// False when the active subgraph has no edges; lambda is then 0.
  bool has_structure = false;
  /// Rayleigh quotient after every iteration, when requested.
  std::vector<double> rayleigh_trace;
};

/// Leading (algebraically largest) eigenpair of the signed adjacency restricted
/// to `active`, i.e. the maximizer of x'(A+ - A-)x over unit vectors.
///
/// Iterates on A + cI with c the maximum active degree, which makes the
/// operator positive semidefinite, so the iteration targets the top of the
/// spectrum rather than the largest magnitude and the Rayleigh quotient is
/// non-decreasing. Stops when the quotient changes by less than `tol`.
/// The entry of largest magnitude is made positive (lowest index on ties).
PowerIterationResult signed_power_iteration(const SignedGraph& g, std::span<const NodeId> active,
                                            double tol, std::size_t max_iter, std::uint64_t seed,
                                            bool record_trace = false);

struct EigenBasis {
  std::size_t rows = 0;
  std::size_t cols = 0;
  /// Row-major rows x cols; column j is the j-th eigenvector (or zero).
  std::vector<double> vectors;
  /// Eigenvalue of each column, 0 for zero columns.
  std::vector<double> values;
  std::size_t iterations = 0;
  bool converged = false;

  double at(std::size_t row, std::size_t col) const { return vectors[row * cols + col]; }
};

/// Top-`d` eigenvectors of A+ - A- by |eigenvalue| (positive first on exact
/// magnitude ties), via subspace iteration with Rayleigh-Ritz extraction.
/// Columns are orthonormal and sign-fixed; isolated nodes get zero rows;
/// directions with (numerically) zero eigenvalue are returned as zero columns.
EigenBasis top_eigenvectors_by_magnitude(const SignedGraph& g, std::size_t d, std::uint64_t seed,
                                         double tol = 1e-10, std::size_t max_iter = 3000);

/// Cyclic Jacobi eigendecomposition of a dense symmetric n x n matrix
/// (row-major). Returns eigenvalues; `vectors` receives eigenvectors as
/// columns (row-major n x n). Unsorted.
std::vector<double> symmetric_eigen(std::vector<double> a, std::size_t n, std::vector<double>& vectors);

}  // namespace sgu
