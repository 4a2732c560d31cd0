#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dualgnn/diff/ops.hpp"
#include "dualgnn/graph/normalize.hpp"

namespace dualgnn {

/// Rows of a matrix shifted to zero mean, with their Euclidean norms.
struct CenteredRows {
  Matrix centered;
  std::vector<double> norms;

  explicit CenteredRows(const Matrix& s) : centered(s.rows(), s.cols()), norms(static_cast<std::size_t>(s.rows())) {
    const Eigen::Index k = s.cols();
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      double total = 0.0;
      for (Eigen::Index c = 0; c < k; ++c) total += s(i, c);
      const double mean = total / static_cast<double>(k);
      double ss = 0.0;
      for (Eigen::Index c = 0; c < k; ++c) {
        const double a = s(i, c) - mean;
        centered(i, c) = a;
        ss += a * a;
      }
      norms[static_cast<std::size_t>(i)] = std::sqrt(ss);
    }
  }
};

namespace detail {

inline bool rows_equal(const Matrix& s, Eigen::Index i, Eigen::Index j) {
  for (Eigen::Index c = 0; c < s.cols(); ++c)
    if (s(i, c) != s(j, c)) return false;
  return true;
}

// Pearson r from precomputed centered rows. Bitwise-identical rows give 1;
// otherwise a zero-variance row gives 0.
inline double pearson_centered(const Matrix& s, const CenteredRows& c, Eigen::Index i, Eigen::Index j) {
  if (rows_equal(s, i, j)) return 1.0;
  const double ni = c.norms[static_cast<std::size_t>(i)];
  const double nj = c.norms[static_cast<std::size_t>(j)];
  if (ni == 0.0 || nj == 0.0) return 0.0;
  double dot = 0.0;
  const double* a = c.centered.row(i).data();
  const double* b = c.centered.row(j).data();
  for (Eigen::Index k = 0; k < s.cols(); ++k) dot += a[k] * b[k];
  return std::clamp(dot / (ni * nj), -1.0, 1.0);
}

}  // namespace detail

/// Pearson correlation of two equal-length vectors (length >= 2).
/// Identical vectors give 1; otherwise a constant vector gives 0.
inline double pearson(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("pearson: length mismatch");
  if (u.size() < 2) throw std::invalid_argument("pearson: vectors need at least 2 entries");
  Matrix s(2, static_cast<Eigen::Index>(u.size()));
  for (std::size_t k = 0; k < u.size(); ++k) {
    s(0, static_cast<Eigen::Index>(k)) = u[k];
    s(1, static_cast<Eigen::Index>(k)) = v[k];
  }
  return detail::pearson_centered(s, CenteredRows(s), 0, 1);
}

/// Reconstructed adjacency from soft cluster assignments: off-diagonal (i, j)
/// is kept with weight r(S_i, S_j) iff r >= alpha; the diagonal is 1.
///
/// This is the O(N^2 K) step of every dual forward pass. Row statistics are
/// computed once and each unordered pair is visited once. The inner loop runs
/// across j so it vectorizes, while every dot product is still summed in
/// k order (results match pearson() bit for bit).
inline SparseMatrix build_adjacency(const Matrix& s, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (s.cols() < 2) throw std::invalid_argument("build_adjacency: need at least 2 clusters");
  const auto n = static_cast<std::size_t>(s.rows());
  const Eigen::Index k = s.cols();
  const CenteredRows c(s);
  const Matrix ct = c.centered.transpose();  // k x n, row-major

  // Upper-triangle pairs, grouped by i with j ascending.
  std::vector<std::size_t> upper_count(n, 0), lower_count(n, 0), pair_col;
  std::vector<double> pair_val, dot(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = n - i - 1;
    if (m == 0) break;
    std::fill(dot.begin(), dot.begin() + static_cast<std::ptrdiff_t>(m), 0.0);
    for (Eigen::Index q = 0; q < k; ++q) {
      const double a = c.centered(static_cast<Eigen::Index>(i), q);
      const double* b = ct.row(q).data() + i + 1;
      double* out = dot.data();
      for (std::size_t j = 0; j < m; ++j) out[j] += a * b[j];
    }
    const double ni = c.norms[i];
    const double* nj = c.norms.data() + i + 1;
    for (std::size_t off = 0; off < m; ++off) dot[off] = dot[off] / (ni * nj[off]);
    for (std::size_t off = 0; off < m; ++off) {
      const std::size_t j = i + 1 + off;
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      double r;
      if (ni == 0.0 || nj[off] == 0.0) {
        r = detail::rows_equal(s, ii, jj) ? 1.0 : 0.0;
      } else {
        r = std::clamp(dot[off], -1.0, 1.0);
        if (r >= alpha && detail::rows_equal(s, ii, jj)) r = 1.0;
      }
      if (r >= alpha) {
        pair_col.push_back(j);
        pair_val.push_back(r);
        ++upper_count[i];
        ++lower_count[j];
      }
    }
  }

  // Row i holds its lower entries (ascending), the diagonal, then its upper entries.
  std::vector<std::size_t> row_ptr(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) row_ptr[i + 1] = row_ptr[i] + lower_count[i] + 1 + upper_count[i];
  std::vector<std::size_t> cols(row_ptr[n]);
  std::vector<double> vals(row_ptr[n]);
  std::vector<std::size_t> lower_cursor(row_ptr.begin(), row_ptr.end() - 1);
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t at = row_ptr[i] + lower_count[i];
    cols[at] = i;
    vals[at] = 1.0;
    ++at;
    for (std::size_t e = 0; e < upper_count[i]; ++e, ++p, ++at) {
      const std::size_t j = pair_col[p];
      cols[at] = j;
      vals[at] = pair_val[p];
      cols[lower_cursor[j]] = i;
      vals[lower_cursor[j]] = pair_val[p];
      ++lower_cursor[j];
    }
  }
  return SparseMatrix::from_csr(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

/// renormalize(asc) * x where the off-diagonal weights of asc are the
/// Pearson correlations of the rows of s. Unlike spmm, the gradient also
/// flows into s through the kept weights (the kept pattern is fixed).
inline Tensor correlation_propagate(const Tensor& s, const SparseMatrix& asc, const Tensor& x) {
  detail::same_tape(s, x);
  if (static_cast<std::size_t>(s.rows()) != asc.size() || static_cast<std::size_t>(x.rows()) != asc.size())
    throw ShapeError("correlation_propagate: node counts disagree");
  Tape& tape = s.tape();
  const std::size_t is = s.id(), ix = x.id();
  SparseMatrix looped = with_self_loops(asc);
  SparseMatrix prop = renormalize(asc);
  Matrix y = prop.multiply(x.value());
  return tape.record(std::move(y), {s, x}, [&tape, is, ix, looped, prop](const Matrix& g) {
    if (tape.requires_grad(ix)) tape.accumulate(ix, prop.transpose_multiply(g));
    if (!tape.requires_grad(is)) return;

    const Matrix& xv = tape.value(ix);
    const Matrix& sv = tape.value(is);
    const std::size_t n = prop.size();
    // prop and looped share one pattern: prop_ij = w_ij / sqrt(d_i d_j).
    const std::vector<double> deg = degree_vector(looped);
    std::vector<double> t(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto c = prop.row_cols(i);
      auto v = prop.row_vals(i);
      for (std::size_t k = 0; k < c.size(); ++k) {
        const auto j = c[k];
        const double m = g.row(static_cast<Eigen::Index>(i)).dot(xv.row(static_cast<Eigen::Index>(j)));
        t[i] += m * v[k];
        t[j] += m * v[k];
      }
    }
    std::vector<double> d_deg(n);
    for (std::size_t i = 0; i < n; ++i) d_deg[i] = -t[i] / (2.0 * deg[i]);

    const CenteredRows cr(sv);
    Matrix gs = Matrix::Zero(sv.rows(), sv.cols());
    for (std::size_t i = 0; i < n; ++i) {
      auto c = looped.row_cols(i);
      auto w = looped.row_vals(i);
      const auto ei = static_cast<Eigen::Index>(i);
      for (std::size_t k = 0; k < c.size(); ++k) {
        const auto j = c[k];
        if (j <= i) continue;
        const auto ej = static_cast<Eigen::Index>(j);
        const double ni = cr.norms[i], nj = cr.norms[j];
        if (ni == 0.0 || nj == 0.0) continue;
        const double inv = 1.0 / std::sqrt(deg[i] * deg[j]);
        const double r = w[k];
        const double m_ij = g.row(ei).dot(xv.row(ej));
        const double m_ji = g.row(ej).dot(xv.row(ei));
        const double dr = (m_ij + m_ji) * inv + d_deg[i] + d_deg[j];
        gs.row(ei) += dr * (cr.centered.row(ej) / (ni * nj) - r * cr.centered.row(ei) / (ni * ni));
        gs.row(ej) += dr * (cr.centered.row(ei) / (ni * nj) - r * cr.centered.row(ej) / (nj * nj));
      }
    }
    tape.accumulate(is, gs);
  }, "correlation_propagate");
}

}  // namespace dualgnn
