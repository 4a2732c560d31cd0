#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dualgnn/errors.hpp"

namespace dualgnn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double weight;
};

/// Square, symmetric sparse matrix in compressed-row form.
///
/// Storage is immutable and shared between copies, so a matrix can be
/// captured by value in a backward closure or handed to several runs
/// without copying the entries.
class SparseMatrix {
 public:
  SparseMatrix() : SparseMatrix(0) {}

  /// Empty n x n matrix.
  explicit SparseMatrix(std::size_t n)
      : SparseMatrix(Storage{n, std::vector<std::size_t>(n + 1, 0), {}, {}}) {}

  /// Builds from (row, col, weight) entries in any order. Rejects out-of-range
  /// indices, duplicates, non-finite weights and asymmetric input.
  static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> entries) {
    for (const auto& t : entries) {
      if (t.row >= n || t.col >= n)
        throw ShapeError("sparse entry (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                         ") outside " + std::to_string(n) + "x" + std::to_string(n));
      if (!std::isfinite(t.weight)) throw NumericError("sparse entry weight is not finite");
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    Storage s;
    s.n = n;
    s.row_ptr.assign(n + 1, 0);
    s.cols.reserve(entries.size());
    s.vals.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (k > 0 && entries[k].row == entries[k - 1].row && entries[k].col == entries[k - 1].col)
        throw std::invalid_argument("duplicate sparse entry (" + std::to_string(entries[k].row) +
                                    "," + std::to_string(entries[k].col) + ")");
      ++s.row_ptr[entries[k].row + 1];
      s.cols.push_back(entries[k].col);
      s.vals.push_back(entries[k].weight);
    }
    for (std::size_t i = 0; i < n; ++i) s.row_ptr[i + 1] += s.row_ptr[i];
    SparseMatrix m(std::move(s));
    if (!m.is_symmetric()) throw std::invalid_argument("sparse matrix is not symmetric");
    return m;
  }

  /// Takes ownership of CSR arrays whose rows are already sorted by column.
  /// Only the array sizes are checked; symmetry is the caller's contract.
  static SparseMatrix from_csr(std::size_t n, std::vector<std::size_t> row_ptr,
                               std::vector<std::size_t> cols, std::vector<double> vals) {
    if (row_ptr.size() != n + 1 || cols.size() != vals.size() || row_ptr.back() != cols.size())
      throw ShapeError("inconsistent CSR arrays");
    Storage s{n, std::move(row_ptr), std::move(cols), std::move(vals)};
    return SparseMatrix(std::move(s));
  }

  static SparseMatrix diagonal(std::span<const double> d) {
    const std::size_t n = d.size();
    std::vector<std::size_t> row_ptr(n + 1), cols;
    std::vector<double> vals;
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] != 0.0) {
        cols.push_back(i);
        vals.push_back(d[i]);
      }
      row_ptr[i + 1] = cols.size();
    }
    return from_csr(n, std::move(row_ptr), std::move(cols), std::move(vals));
  }

  std::size_t size() const noexcept { return data_->n; }
  std::size_t nnz() const noexcept { return data_->cols.size(); }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {data_->cols.data() + data_->row_ptr[i], data_->row_ptr[i + 1] - data_->row_ptr[i]};
  }
  std::span<const double> row_vals(std::size_t i) const {
    return {data_->vals.data() + data_->row_ptr[i], data_->row_ptr[i + 1] - data_->row_ptr[i]};
  }
  std::span<const std::size_t> row_ptr() const { return data_->row_ptr; }
  std::span<const std::size_t> cols() const { return data_->cols; }
  std::span<const double> vals() const { return data_->vals; }

  /// Weight at (i, j), zero when absent.
  double at(std::size_t i, std::size_t j) const {
    auto c = row_cols(i);
    auto it = std::lower_bound(c.begin(), c.end(), j);
    if (it == c.end() || *it != j) return 0.0;
    return row_vals(i)[static_cast<std::size_t>(it - c.begin())];
  }

  bool is_symmetric() const {
    for (std::size_t i = 0; i < size(); ++i) {
      auto c = row_cols(i);
      auto v = row_vals(i);
      for (std::size_t k = 0; k < c.size(); ++k) {
        auto cj = row_cols(c[k]);
        auto it = std::lower_bound(cj.begin(), cj.end(), i);
        if (it == cj.end() || *it != i) return false;
        if (row_vals(c[k])[static_cast<std::size_t>(it - cj.begin())] != v[k]) return false;
      }
    }
    return true;
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t i = 0; i < size(); ++i) {
      auto c = row_cols(i);
      auto v = row_vals(i);
      for (std::size_t k = 0; k < c.size(); ++k) out.push_back({i, c[k], v[k]});
    }
    return out;
  }

  Matrix dense() const {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
    for (const auto& t : triplets())
      out(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.weight;
    return out;
  }

  /// this * x
  Matrix multiply(const Matrix& x) const {
    check_rows(x);
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    const auto w = static_cast<std::size_t>(x.cols());
    for (std::size_t i = 0; i < size(); ++i) {
      auto c = row_cols(i);
      auto v = row_vals(i);
      double* dst = out.data() + i * w;
      for (std::size_t k = 0; k < c.size(); ++k) {
        const double* src = x.data() + c[k] * w;
        for (std::size_t q = 0; q < w; ++q) dst[q] += v[k] * src[q];
      }
    }
    return out;
  }

  /// transpose(this) * x
  Matrix transpose_multiply(const Matrix& x) const {
    check_rows(x);
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    const auto w = static_cast<std::size_t>(x.cols());
    for (std::size_t i = 0; i < size(); ++i) {
      auto c = row_cols(i);
      auto v = row_vals(i);
      const double* src = x.data() + i * w;
      for (std::size_t k = 0; k < c.size(); ++k) {
        double* dst = out.data() + c[k] * w;
        for (std::size_t q = 0; q < w; ++q) dst[q] += v[k] * src[q];
      }
    }
    return out;
  }

 private:
  struct Storage {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> cols;
    std::vector<double> vals;
  };

  explicit SparseMatrix(Storage s) : data_(std::make_shared<const Storage>(std::move(s))) {}

  void check_rows(const Matrix& x) const {
    if (static_cast<std::size_t>(x.rows()) != size())
      throw ShapeError("sparse product: " + std::to_string(size()) + "x" + std::to_string(size()) +
                       " times " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }

  std::shared_ptr<const Storage> data_;
};

}  // namespace dualgnn
