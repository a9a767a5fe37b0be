#include "sgu/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgu/error.hpp"
#include "sgu/rng.hpp"

namespace sgu {
namespace {

/// Signed adjacency of an induced subgraph in local CSR form.
struct LocalOperator {
  std::size_t n = 0;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  std::size_t max_degree = 0;

  void apply(const double* x, double* y) const {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) acc += vals[k] * x[cols[k]];
      y[i] = acc;
    }
  }
  bool empty() const { return cols.empty(); }
};

LocalOperator build_operator(const SignedGraph& g, std::span<const NodeId> nodes) {
  constexpr std::uint32_t kAbsent = ~std::uint32_t{0};
  std::vector<std::uint32_t> local(g.node_count(), kAbsent);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<std::uint32_t>(i);
  LocalOperator op;
  op.n = nodes.size();
  op.offsets.assign(op.n + 1, 0);
  for (std::size_t i = 0; i < op.n; ++i) {
    std::size_t deg = 0;
    for (const Neighbor& nb : g.neighbors(nodes[i])) {
      if (local[nb.node] == kAbsent) continue;
      op.cols.push_back(local[nb.node]);
      op.vals.push_back(static_cast<double>(to_int(nb.sign)));
      ++deg;
    }
    op.offsets[i + 1] = op.cols.size();
    op.max_degree = std::max(op.max_degree, deg);
  }
  return op;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double norm(const double* a, std::size_t n) { return std::sqrt(dot(a, a, n)); }

/// Flip so the entry of largest magnitude is positive; near-equal magnitudes
/// resolve to the lowest index.
void fix_sign(double* x, std::size_t n, std::size_t stride = 1) {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) best = std::max(best, std::abs(x[i * stride]));
  if (best == 0.0) return;
  const double floor = best * (1.0 - 1e-9);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(x[i * stride]) >= floor) {
      if (x[i * stride] < 0.0) {
        for (std::size_t j = 0; j < n; ++j) x[j * stride] = -x[j * stride];
      }
      return;
    }
  }
}

}  // namespace

PowerIterationResult signed_power_iteration(const SignedGraph& g, std::span<const NodeId> active,
                                            double tol, std::size_t max_iter, std::uint64_t seed,
                                            bool record_trace) {
  if (active.empty()) throw InvalidParamsError("power iteration: active set is empty");
  if (!(tol > 0.0)) throw InvalidParamsError("power iteration: tolerance must be positive");
  PowerIterationResult res;
  res.nodes.assign(active.begin(), active.end());
  std::sort(res.nodes.begin(), res.nodes.end());
  res.nodes.erase(std::unique(res.nodes.begin(), res.nodes.end()), res.nodes.end());
  for (NodeId u : res.nodes) {
    if (u >= g.node_count()) throw InvalidParamsError("power iteration: node out of range");
  }
  const std::size_t n = res.nodes.size();
  const LocalOperator op = build_operator(g, res.nodes);
  res.x.assign(n, 0.0);
  if (op.empty()) {
    res.x[0] = 1.0;
    res.converged = true;
    return res;
  }
  res.has_structure = true;

  Rng rng(derive_seed(seed, "power-iteration"));
  std::vector<double> x(n), ax(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  double nx = norm(x.data(), n);
  for (double& v : x) v /= nx;

  const double shift = static_cast<double>(op.max_degree);
  double prev = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    op.apply(x.data(), ax.data());
    const double r = dot(x.data(), ax.data(), n);
    if (record_trace) res.rayleigh_trace.push_back(r);
    res.lambda = r;
    res.iterations = it + 1;
    if (it > 0 && std::abs(r - prev) < tol) {
      res.converged = true;
      break;
    }
    prev = r;
    for (std::size_t i = 0; i < n; ++i) ax[i] += shift * x[i];
    nx = norm(ax.data(), n);
    if (nx == 0.0) break;  // x in the kernel of A + cI; cannot happen for c > 0 with edges
    for (std::size_t i = 0; i < n; ++i) x[i] = ax[i] / nx;
  }
  fix_sign(x.data(), n);
  res.x = std::move(x);
  return res;
}

// ---------------------------------------------------------------------------

std::vector<double> symmetric_eigen(std::vector<double> a, std::size_t n, std::vector<double>& vectors) {
  vectors.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vectors[i * n + i] = 1.0;
  double total = 0.0;
  for (double v : a) total += v * v;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off <= 1e-30 * std::max(total, 1e-300)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors[k * n + p], vkq = vectors[k * n + q];
          vectors[k * n + p] = c * vkp - s * vkq;
          vectors[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i * n + i];
  return values;
}

namespace {

/// Modified Gram-Schmidt (two passes) on column-major m x b. Columns that
/// collapse are replaced by fresh random directions.
void orthonormalize(std::vector<double>& x, std::size_t m, std::size_t b, Rng& rng) {
  for (std::size_t j = 0; j < b; ++j) {
    double* xj = x.data() + j * m;
    for (int attempt = 0; attempt < 8; ++attempt) {
      const double before = norm(xj, m);
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < j; ++k) {
          const double* xk = x.data() + k * m;
          const double c = dot(xk, xj, m);
          for (std::size_t i = 0; i < m; ++i) xj[i] -= c * xk[i];
        }
      }
      const double after = norm(xj, m);
      if (after > 1e-10 * std::max(before, 1e-300) && after > 1e-300) {
        for (std::size_t i = 0; i < m; ++i) xj[i] /= after;
        break;
      }
      for (std::size_t i = 0; i < m; ++i) xj[i] = rng.uniform(-1.0, 1.0);
    }
  }
}

}  // namespace

EigenBasis top_eigenvectors_by_magnitude(const SignedGraph& g, std::size_t d, std::uint64_t seed,
                                         double tol, std::size_t max_iter) {
  EigenBasis out;
  out.rows = g.node_count();
  out.cols = d;
  out.vectors.assign(out.rows * d, 0.0);
  out.values.assign(d, 0.0);
  if (d == 0) return out;

  std::vector<NodeId> support;
  for (std::size_t u = 0; u < g.node_count(); ++u) {
    if (g.degree(static_cast<NodeId>(u)) > 0) support.push_back(static_cast<NodeId>(u));
  }
  const std::size_t m = support.size();
  if (m == 0) {
    out.converged = true;
    return out;
  }
  const LocalOperator op = build_operator(g, support);
  const std::size_t b = std::min(m, d + 8);

  Rng rng(derive_seed(seed, "subspace-iteration"));
  std::vector<double> x(m * b), y(m * b), h(b * b), q, ritz(m * b), ay(m * b);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);

  std::vector<double> theta;
  std::vector<std::size_t> order(b);
  for (std::size_t it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    orthonormalize(x, m, b, rng);
    for (std::size_t j = 0; j < b; ++j) op.apply(x.data() + j * m, y.data() + j * m);
    for (std::size_t a = 0; a < b; ++a) {
      for (std::size_t c = a; c < b; ++c) {
        const double v = 0.5 * (dot(x.data() + a * m, y.data() + c * m, m) +
                                dot(x.data() + c * m, y.data() + a * m, m));
        h[a * b + c] = v;
        h[c * b + a] = v;
      }
    }
    theta = symmetric_eigen(h, b, q);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
      const double ma = std::abs(theta[a]), mc = std::abs(theta[c]);
      const double scale = std::max({1.0, ma, mc});
      if (std::abs(ma - mc) > 1e-9 * scale) return ma > mc;
      return theta[a] > theta[c];
    });

    // Ritz vectors X Q and their images A X Q = Y Q, in sorted order.
    std::fill(ritz.begin(), ritz.end(), 0.0);
    std::fill(ay.begin(), ay.end(), 0.0);
    for (std::size_t jj = 0; jj < b; ++jj) {
      const std::size_t j = order[jj];
      double* r = ritz.data() + jj * m;
      double* s = ay.data() + jj * m;
      for (std::size_t k = 0; k < b; ++k) {
        const double w = q[k * b + j];
        if (w == 0.0) continue;
        const double* xk = x.data() + k * m;
        const double* yk = y.data() + k * m;
        for (std::size_t i = 0; i < m; ++i) {
          r[i] += w * xk[i];
          s[i] += w * yk[i];
        }
      }
    }
    const double top = std::abs(theta[order[0]]);
    const double zero_floor = 1e-8 * std::max(1.0, top);
    bool done = b == m;  // full basis: Rayleigh-Ritz is exact
    if (!done) {
      done = true;
      for (std::size_t jj = 0; jj < std::min(d, b) && done; ++jj) {
        const double t = theta[order[jj]];
        if (std::abs(t) <= zero_floor) continue;
        double res = 0.0;
        const double* r = ritz.data() + jj * m;
        const double* s = ay.data() + jj * m;
        for (std::size_t i = 0; i < m; ++i) res += (s[i] - t * r[i]) * (s[i] - t * r[i]);
        if (std::sqrt(res) > tol * std::max(1.0, top)) done = false;
      }
    }
    if (done || it + 1 == max_iter) {
      out.converged = done;
      for (std::size_t jj = 0; jj < std::min(d, b); ++jj) {
        const double t = theta[order[jj]];
        if (std::abs(t) <= zero_floor) continue;
        double* r = ritz.data() + jj * m;
        fix_sign(r, m);
        out.values[jj] = t;
        for (std::size_t i = 0; i < m; ++i) out.vectors[support[i] * d + jj] = r[i];
      }
      break;
    }
    x.swap(ay);  // next block: A applied to the current Ritz vectors
  }
  return out;
}

}  // namespace sgu
