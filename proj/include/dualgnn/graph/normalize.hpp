#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dualgnn/diff/sparse.hpp"

namespace dualgnn {

/// Row sums of a.
inline std::vector<double> degree_vector(const SparseMatrix& a) {
  std::vector<double> d(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (double w : a.row_vals(i)) d[i] += w;
  return d;
}

namespace detail {

inline void require_nonnegative(const SparseMatrix& a, const char* op) {
  for (double w : a.vals())
    if (w < 0.0) throw std::invalid_argument(std::string(op) + ": negative edge weight");
}

inline std::vector<double> inv_sqrt(const std::vector<double>& d) {
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i] > 0.0 ? 1.0 / std::sqrt(d[i]) : 0.0;
  return out;
}

inline SparseMatrix scale_symmetric(const SparseMatrix& a, const std::vector<double>& s) {
  std::vector<double> vals(a.vals().begin(), a.vals().end());
  std::vector<std::size_t> cols(a.cols().begin(), a.cols().end());
  std::vector<std::size_t> row_ptr(a.row_ptr().begin(), a.row_ptr().end());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) vals[k] *= s[i] * s[cols[k]];
  return SparseMatrix::from_csr(a.size(), std::move(row_ptr), std::move(cols), std::move(vals));
}

}  // namespace detail

/// D^{-1/2} a D^{-1/2}. Nodes of degree zero keep all-zero rows and columns.
inline SparseMatrix normalize_sym(const SparseMatrix& a) {
  detail::require_nonnegative(a, "normalize_sym");
  return detail::scale_symmetric(a, detail::inv_sqrt(degree_vector(a)));
}

/// a with a unit self-loop on every node that has no diagonal entry; existing
/// diagonal weights are kept.
inline SparseMatrix with_self_loops(const SparseMatrix& a) {
  const std::size_t n = a.size();
  std::vector<std::size_t> row_ptr(n + 1, 0), cols;
  std::vector<double> vals;
  cols.reserve(a.nnz() + n);
  vals.reserve(a.nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    auto c = a.row_cols(i);
    auto v = a.row_vals(i);
    bool placed = false;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (!placed && c[k] >= i) {
        if (c[k] != i) {
          cols.push_back(i);
          vals.push_back(1.0);
        }
        placed = true;
      }
      cols.push_back(c[k]);
      vals.push_back(v[k]);
    }
    if (!placed) {
      cols.push_back(i);
      vals.push_back(1.0);
    }
    row_ptr[i + 1] = cols.size();
  }
  return SparseMatrix::from_csr(n, std::move(row_ptr), std::move(cols), std::move(vals));
}

/// GCN propagation operator D'^{-1/2} (a + I) D'^{-1/2}, D' the degree of a + I.
/// Self-loops already present in a are not doubled.
inline SparseMatrix renormalize(const SparseMatrix& a) {
  detail::require_nonnegative(a, "renormalize");
  SparseMatrix looped = with_self_loops(a);
  return detail::scale_symmetric(looped, detail::inv_sqrt(degree_vector(looped)));
}

}  // namespace dualgnn
