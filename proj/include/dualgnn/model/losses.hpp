#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualgnn/diff/ops.hpp"

namespace dualgnn {

/// Sum over `nodes` of -log softmax(logits)_{i, y_i}, fused so that extreme
/// logits never take log(0).
inline Tensor cross_entropy_masked(const Tensor& logits, std::span<const int> labels,
                                   std::span<const std::size_t> nodes) {
  if (nodes.empty()) throw std::invalid_argument("cross_entropy_masked: empty mask");
  const Matrix& z = logits.value();
  if (static_cast<std::size_t>(z.rows()) != labels.size())
    throw ShapeError("cross_entropy_masked: label count does not match rows");
  std::vector<std::size_t> rows(nodes.begin(), nodes.end());
  std::vector<Eigen::Index> targets;
  targets.reserve(rows.size());
  for (auto i : rows) {
    if (i >= labels.size()) throw std::out_of_range("cross_entropy_masked: node index out of range");
    const int y = labels[i];
    if (y < 0 || y >= z.cols())
      throw std::invalid_argument("cross_entropy_masked: label " + std::to_string(y) + " of node " +
                                  std::to_string(i) + " out of range");
    targets.push_back(y);
  }

  double loss = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(rows[k]);
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    loss += lse - z(i, targets[k]);
  }

  Tape& tape = logits.tape();
  const std::size_t il = logits.id();
  return tape.record(Matrix::Constant(1, 1, loss), {logits},
                     [&tape, il, rows = std::move(rows), targets = std::move(targets)](const Matrix& g) {
                       const Matrix& z = tape.value(il);
                       Matrix gz = Matrix::Zero(z.rows(), z.cols());
                       for (std::size_t k = 0; k < rows.size(); ++k) {
                         const auto i = static_cast<Eigen::Index>(rows[k]);
                         const double m = z.row(i).maxCoeff();
                         Eigen::RowVectorXd e = (z.row(i).array() - m).exp();
                         gz.row(i) += g(0, 0) * (e / e.sum());
                         gz(i, targets[k]) -= g(0, 0);
                       }
                       tape.accumulate(il, gz);
                     },
                     "cross_entropy_masked");
}

struct MincutTerms {
  Tensor total;
  Tensor cut;          // -Tr(S^T A S) / Tr(S^T D S), in [-1, 0]
  Tensor regularizer;  // || S^T S / ||S^T S||_F - I / sqrt(K) ||_F, in [0, 2]
  // False when Tr(S^T D S) = 0 (no edges); the cut term is then 0 and
  // total is the regularizer alone.
  bool cut_defined = true;
};

/// Relaxed min-cut clustering loss of assignment s on the normalized input
/// adjacency, whose row sums are `degree`.
inline MincutTerms mincut_loss(const Tensor& s, const SparseMatrix& normalized, std::span<const double> degree) {
  if (degree.size() != normalized.size()) throw ShapeError("mincut_loss: degree length mismatch");
  Tape& tape = s.tape();
  MincutTerms out;

  Tensor assoc = trace_quadratic(s, normalized);
  Tensor volume = trace_quadratic(s, SparseMatrix::diagonal(degree));
  if (volume.item() > 0.0) {
    out.cut = neg(divide(assoc, volume));
  } else {
    out.cut = tape.constant(Matrix::Zero(1, 1));
    out.cut_defined = false;
  }

  Tensor gram = matmul(transpose(s), s);
  Tensor gram_norm = frobenius_norm(gram);
  if (gram_norm.item() == 0.0) throw NumericError("mincut_loss: S^T S has zero Frobenius norm");
  const auto k = gram.rows();
  const Matrix target = Matrix::Identity(k, k) / std::sqrt(static_cast<double>(k));
  out.regularizer = frobenius_norm(add_constant(divide(gram, gram_norm), -target));

  out.total = out.cut_defined ? add(out.cut, out.regularizer) : out.regularizer;
  return out;
}

struct LossBreakdown {
  double l_ce = 0.0;
  double l_ce_aux = 0.0;
  double l_sc = 0.0;
  double total = 0.0;
};

struct JointLoss {
  Tensor total;
  LossBreakdown breakdown;
};

/// L = L_CE + L~_CE + L_sc, summed in that order. Absent terms count as zero.
inline JointLoss joint_loss(Tape& tape, const std::optional<Tensor>& ce, const std::optional<Tensor>& ce_aux,
                            const std::optional<Tensor>& sc) {
  JointLoss out;
  out.breakdown.l_ce = ce ? ce->item() : 0.0;
  out.breakdown.l_ce_aux = ce_aux ? ce_aux->item() : 0.0;
  out.breakdown.l_sc = sc ? sc->item() : 0.0;
  out.breakdown.total = (out.breakdown.l_ce + out.breakdown.l_ce_aux) + out.breakdown.l_sc;

  std::optional<Tensor> acc;
  for (const auto* term : {&ce, &ce_aux, &sc}) {
    if (!*term) continue;
    acc = acc ? add(*acc, **term) : **term;
  }
  out.total = acc ? *acc : tape.constant(Matrix::Zero(1, 1));
  return out;
}

}  // namespace dualgnn
