#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

#include "dualgnn/diff/sparse.hpp"
#include "dualgnn/errors.hpp"

namespace dualgnn {

/// Learnable weights that outlive any single tape. backward() adds into grad.
struct Parameter {
  Matrix value;
  Matrix grad;

  Parameter() = default;
  explicit Parameter(Matrix v) : value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid as long as its tape.
class Tensor {
 public:
  Tensor() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const;
  /// Value of a 1x1 tensor.
  double item() const;

  std::size_t id() const noexcept { return id_; }
  Tape& tape() const { return *tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run computation graph. Nodes are appended in evaluation order,
/// so reverse insertion order is a valid reverse topological order.
class Tape {
 public:
  using Backward = std::function<void(const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Non-differentiable input.
  Tensor constant(Matrix v) { return push(std::move(v), false, nullptr, {}, "constant"); }

  /// Differentiable input owned by the tape; its gradient is read via Tensor::grad().
  Tensor leaf(Matrix v) { return push(std::move(v), true, nullptr, {}, "leaf"); }

  /// Differentiable input bound to a Parameter; backward() accumulates into p.grad.
  Tensor parameter(Parameter& p) { return push(p.value, true, &p, {}, "parameter"); }

  /// Records an op result. The backward closure is kept only when some input
  /// requires a gradient. Throws NumericError on non-finite output.
  Tensor record(Matrix value, std::initializer_list<Tensor> inputs, Backward backward,
                std::string_view op) {
    bool needs = false;
    for (const auto& t : inputs) needs = needs || t.requires_grad();
    return push(std::move(value), needs, nullptr, needs ? std::move(backward) : Backward{}, op);
  }

  /// Adds g into the gradient of node id (no-op when the node needs no gradient).
  void accumulate(std::size_t id, const Matrix& g) {
    Node& n = nodes_.at(id);
    if (!n.requires_grad) return;
    if (!n.has_grad) {
      n.grad = g;
      n.has_grad = true;
    } else {
      n.grad += g;
    }
  }

  void backward(const Tensor& loss) {
    if (loss.tape_ != this) throw std::invalid_argument("loss tensor belongs to another tape");
    const Node& root = nodes_.at(loss.id_);
    if (root.value.rows() != 1 || root.value.cols() != 1)
      throw ShapeError("backward needs a scalar loss, got " + std::to_string(root.value.rows()) +
                       "x" + std::to_string(root.value.cols()));
    // Interior gradients are per-call; leaf gradients accumulate across calls.
    for (auto& n : nodes_) {
      if (n.backward || n.sink) n.has_grad = false;
    }
    accumulate(loss.id_, Matrix::Ones(1, 1));
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.has_grad) continue;
      if (n.backward) n.backward(n.grad);
      if (n.sink) n.sink->grad += n.grad;
    }
  }

  /// Clears gradients held by tape-owned leaves.
  void zero_grad() {
    for (auto& n : nodes_) n.has_grad = false;
  }

  std::size_t size() const noexcept { return nodes_.size(); }

  const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }

  const Matrix& grad(std::size_t id) const {
    const Node& n = nodes_.at(id);
    if (!n.has_grad) {
      n.grad.setZero(n.value.rows(), n.value.cols());
      n.has_grad = true;
    }
    return n.grad;
  }

  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

 private:
  struct Node {
    Matrix value;
    mutable Matrix grad;
    bool requires_grad = false;
    mutable bool has_grad = false;
    Parameter* sink = nullptr;
    Backward backward;
  };

  Tensor push(Matrix v, bool requires_grad, Parameter* sink, Backward backward,
              std::string_view op) {
    if (!v.allFinite()) throw NumericError("non-finite value produced by " + std::string(op));
    nodes_.push_back(Node{std::move(v), Matrix{}, requires_grad, false, sink, std::move(backward)});
    return Tensor(this, nodes_.size() - 1);
  }

  // deque keeps node references stable while ops append.
  std::deque<Node> nodes_;
};

inline const Matrix& Tensor::value() const { return tape_->value(id_); }
inline const Matrix& Tensor::grad() const { return tape_->grad(id_); }
inline bool Tensor::requires_grad() const { return tape_->requires_grad(id_); }
inline double Tensor::item() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("item() on a non-scalar tensor");
  return v(0, 0);
}

}  // namespace dualgnn
