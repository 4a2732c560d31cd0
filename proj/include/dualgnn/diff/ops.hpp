#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "dualgnn/diff/sparse.hpp"
#include "dualgnn/diff/tape.hpp"

namespace dualgnn {

namespace detail {

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void same_tape(const Tensor& a, const Tensor& b) {
  if (&a.tape() != &b.tape()) throw std::invalid_argument("operands live on different tapes");
}

inline void require_scalar(const Tensor& t, const char* op) {
  if (t.rows() != 1 || t.cols() != 1)
    throw ShapeError(std::string(op) + ": expected scalar, got " + shape_str(t.value()));
}

}  // namespace detail

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::same_tape(a, b);
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + detail::shape_str(a.value()) + " * " + detail::shape_str(b.value()));
  Tape& tape = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  Matrix out = a.value() * b.value();
  return tape.record(std::move(out), {a, b}, [&tape, ia, ib](const Matrix& g) {
    if (tape.requires_grad(ia)) tape.accumulate(ia, g * tape.value(ib).transpose());
    if (tape.requires_grad(ib)) tape.accumulate(ib, tape.value(ia).transpose() * g);
  }, "matmul");
}

/// s * t with s held constant.
inline Tensor spmm(const SparseMatrix& s, const Tensor& t) {
  if (static_cast<std::size_t>(t.rows()) != s.size())
    throw ShapeError("spmm: " + std::to_string(s.size()) + "x" + std::to_string(s.size()) + " * " +
                     detail::shape_str(t.value()));
  Tape& tape = t.tape();
  const std::size_t it = t.id();
  return tape.record(s.multiply(t.value()), {t}, [&tape, it, s](const Matrix& g) {
    tape.accumulate(it, s.transpose_multiply(g));
  }, "spmm");
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("add: " + detail::shape_str(a.value()) + " + " + detail::shape_str(b.value()));
  Tape& tape = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(a.value() + b.value(), {a, b}, [&tape, ia, ib](const Matrix& g) {
    tape.accumulate(ia, g);
    tape.accumulate(ib, g);
  }, "add");
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("sub: " + detail::shape_str(a.value()) + " - " + detail::shape_str(b.value()));
  Tape& tape = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(a.value() - b.value(), {a, b}, [&tape, ia, ib](const Matrix& g) {
    tape.accumulate(ia, g);
    tape.accumulate(ib, -g);
  }, "sub");
}

inline Tensor scale(const Tensor& a, double c) {
  Tape& tape = a.tape();
  const std::size_t ia = a.id();
  return tape.record(c * a.value(), {a}, [&tape, ia, c](const Matrix& g) {
    tape.accumulate(ia, c * g);
  }, "scale");
}

inline Tensor neg(const Tensor& a) { return scale(a, -1.0); }

/// a + c for a constant matrix c of the same shape.
inline Tensor add_constant(const Tensor& a, const Matrix& c) {
  if (a.rows() != c.rows() || a.cols() != c.cols())
    throw ShapeError("add_constant: " + detail::shape_str(a.value()) + " + " + detail::shape_str(c));
  Tape& tape = a.tape();
  const std::size_t ia = a.id();
  return tape.record(a.value() + c, {a}, [&tape, ia](const Matrix& g) { tape.accumulate(ia, g); },
                     "add_constant");
}

/// a / s where s is a 1x1 tensor. Throws NumericError when s is zero.
inline Tensor divide(const Tensor& a, const Tensor& s) {
  detail::same_tape(a, s);
  detail::require_scalar(s, "divide");
  const double d = s.item();
  if (d == 0.0) throw NumericError("divide: zero divisor");
  Tape& tape = a.tape();
  const std::size_t ia = a.id(), is = s.id();
  return tape.record(a.value() / d, {a, s}, [&tape, ia, is, d](const Matrix& g) {
    if (tape.requires_grad(ia)) tape.accumulate(ia, g / d);
    if (tape.requires_grad(is)) {
      const double dot = g.cwiseProduct(tape.value(ia)).sum();
      tape.accumulate(is, Matrix::Constant(1, 1, -dot / (d * d)));
    }
  }, "divide");
}

inline Tensor transpose(const Tensor& a) {
  Tape& tape = a.tape();
  const std::size_t ia = a.id();
  return tape.record(a.value().transpose(), {a}, [&tape, ia](const Matrix& g) {
    tape.accumulate(ia, g.transpose());
  }, "transpose");
}

/// Adds a 1 x k row vector to every row of an n x k tensor.
inline Tensor add_row_bias(const Tensor& a, const Tensor& bias) {
  detail::same_tape(a, bias);
  if (bias.rows() != 1 || bias.cols() != a.cols())
    throw ShapeError("add_row_bias: " + detail::shape_str(a.value()) + " + " +
                     detail::shape_str(bias.value()));
  Tape& tape = a.tape();
  const std::size_t ia = a.id(), ib = bias.id();
  Matrix out = a.value().rowwise() + bias.value().row(0);
  return tape.record(std::move(out), {a, bias}, [&tape, ia, ib](const Matrix& g) {
    tape.accumulate(ia, g);
    if (tape.requires_grad(ib)) tape.accumulate(ib, g.colwise().sum());
  }, "add_row_bias");
}

inline Tensor sum(const Tensor& a) {
  Tape& tape = a.tape();
  const std::size_t ia = a.id();
  const Eigen::Index r = a.rows(), c = a.cols();
  return tape.record(Matrix::Constant(1, 1, a.value().sum()), {a}, [&tape, ia, r, c](const Matrix& g) {
    tape.accumulate(ia, Matrix::Constant(r, c, g(0, 0)));
  }, "sum");
}

/// Elementwise x for x > 0, exp(x) - 1 otherwise. Derivative at 0 is taken as 1.
inline Tensor elu(const Tensor& a) {
  Tape& tape = a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); });
  return tape.record(std::move(out), {a}, [&tape, ia](const Matrix& g) {
    Matrix d = tape.value(ia).unaryExpr([](double x) { return x >= 0.0 ? 1.0 : std::exp(x); });
    tape.accumulate(ia, g.cwiseProduct(d));
  }, "elu");
}

inline Matrix softmax_rows_value(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    out.row(i) = (x.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

/// Row-wise softmax, stabilised by subtracting each row's maximum.
inline Tensor softmax_rows(const Tensor& a) {
  Tape& tape = a.tape();
  const std::size_t ia = a.id();
  Matrix y = softmax_rows_value(a.value());
  Matrix value = y;
  return tape.record(std::move(value), {a}, [&tape, ia, y = std::move(y)](const Matrix& g) {
    Matrix inner = g.cwiseProduct(y).rowwise().sum();
    Matrix gx = y.cwiseProduct(g - inner.replicate(1, g.cols()));
    tape.accumulate(ia, gx);
  }, "softmax_rows");
}

/// Tr(s^T m s) with m constant.
inline Tensor trace_quadratic(const Tensor& s, const SparseMatrix& m) {
  if (static_cast<std::size_t>(s.rows()) != m.size())
    throw ShapeError("trace_quadratic: " + detail::shape_str(s.value()) + " against " +
                     std::to_string(m.size()) + "x" + std::to_string(m.size()));
  Tape& tape = s.tape();
  const std::size_t is = s.id();
  const double v = s.value().cwiseProduct(m.multiply(s.value())).sum();
  return tape.record(Matrix::Constant(1, 1, v), {s}, [&tape, is, m](const Matrix& g) {
    const Matrix& sv = tape.value(is);
    tape.accumulate(is, g(0, 0) * (m.multiply(sv) + m.transpose_multiply(sv)));
  }, "trace_quadratic");
}

/// sqrt(sum of squares). The gradient at an all-zero input is taken as zero.
inline Tensor frobenius_norm(const Tensor& a) {
  Tape& tape = a.tape();
  const std::size_t ia = a.id();
  const double nrm = a.value().norm();
  return tape.record(Matrix::Constant(1, 1, nrm), {a}, [&tape, ia, nrm](const Matrix& g) {
    if (nrm == 0.0) return;
    tape.accumulate(ia, (g(0, 0) / nrm) * tape.value(ia));
  }, "frobenius_norm");
}

}  // namespace dualgnn
