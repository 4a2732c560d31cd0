#pragma once

#include <vector>

#include "dualgnn/diff/ops.hpp"
#include "dualgnn/graph/graph.hpp"
#include "dualgnn/graph/normalize.hpp"
#include "dualgnn/model/adjacency.hpp"
#include "dualgnn/model/params.hpp"

namespace dualgnn {

/// Per-graph constants shared by every forward pass of a run.
struct GraphOperators {
  Matrix features;
  SparseMatrix propagation;             // renormalized adjacency, GCN operator
  SparseMatrix normalized;              // D^{-1/2} A D^{-1/2}, used by the clustering loss
  std::vector<double> normalized_degree;  // row sums of `normalized`

  static GraphOperators from(const Graph& g) {
    GraphOperators ops;
    ops.features = g.features;
    ops.propagation = renormalize(g.adjacency);
    ops.normalized = normalize_sym(g.adjacency);
    ops.normalized_degree = degree_vector(ops.normalized);
    return ops;
  }
};

struct Classification {
  Tensor logits;
  Tensor probs;
};

/// Two GCN layers: elu(P elu(P X W1) W2), the outer ELU optional.
inline Tensor encode_primary(const Tensor& x, const SparseMatrix& propagation, const Tensor& w1,
                             const Tensor& w2, bool elu_on_output = true) {
  Tensor h = elu(spmm(propagation, matmul(x, w1)));
  h = spmm(propagation, matmul(h, w2));
  return elu_on_output ? elu(h) : h;
}

/// Single fully connected layer followed by a row softmax.
inline Classification classify(const Tensor& h, const Tensor& w, const Tensor& b) {
  Tensor logits = add_row_bias(matmul(h, w), b);
  return {logits, softmax_rows(logits)};
}

/// Soft assignment of every node to K clusters (one-layer perceptron + softmax).
inline Tensor cluster_assign(const Tensor& h, const Tensor& w, const Tensor& b) {
  return softmax_rows(add_row_bias(matmul(h, w), b));
}

/// Two GCN layers over renormalize(asc), keeping asc's edge weights.
/// With detach_asc false the Pearson weights are differentiated through `assignment`.
inline Tensor encode_auxiliary(const Tensor& h, const SparseMatrix& asc, const Tensor& w1, const Tensor& w2,
                               const ModelConfig& cfg, const Tensor& assignment = {}) {
  const bool live = !cfg.detach_asc && assignment.valid();
  const SparseMatrix propagation = live ? SparseMatrix() : renormalize(asc);
  auto propagate = [&](const Tensor& t) {
    return live ? correlation_propagate(assignment, asc, t) : spmm(propagation, t);
  };
  Tensor out = elu(propagate(matmul(h, w1)));
  out = propagate(matmul(out, w2));
  return cfg.elu_on_output ? elu(out) : out;
}

struct DualOutputs {
  Tensor embedding;  // H
  Classification primary;
  Tensor assignment;  // S
  SparseMatrix asc;
  Tensor aux_embedding;
  Classification auxiliary;
};

struct ForwardOptions {
  bool primary_head = true;
  bool auxiliary = true;  // implies the clustering head
  bool cluster = true;
  // Use this adjacency instead of rebuilding it from S.
  const SparseMatrix* fixed_asc = nullptr;
};

/// One forward pass in training order: H, P, S, A_sc, H~, P~.
inline DualOutputs forward_dual(Tape& tape, const GraphOperators& graph, DualModelParams& params,
                                const ModelConfig& cfg, const ForwardOptions& opt = {}) {
  DualOutputs out;
  Tensor x = tape.constant(graph.features);
  out.embedding = encode_primary(x, graph.propagation, tape.parameter(params.enc1), tape.parameter(params.enc2),
                                 cfg.elu_on_output);
  if (opt.primary_head)
    out.primary = classify(out.embedding, tape.parameter(params.cls_w), tape.parameter(params.cls_b));
  if (opt.cluster || opt.auxiliary)
    out.assignment = cluster_assign(out.embedding, tape.parameter(params.clu_w), tape.parameter(params.clu_b));
  if (opt.auxiliary) {
    out.asc = opt.fixed_asc ? *opt.fixed_asc : build_adjacency(out.assignment.value(), cfg.alpha);
    out.aux_embedding = encode_auxiliary(out.embedding, out.asc, tape.parameter(params.aux1),
                                         tape.parameter(params.aux2), cfg, out.assignment);
    out.auxiliary = classify(out.aux_embedding, tape.parameter(params.aux_cls_w), tape.parameter(params.aux_cls_b));
  }
  return out;
}

}  // namespace dualgnn
