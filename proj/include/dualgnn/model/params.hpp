#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualgnn/diff/tape.hpp"
#include "dualgnn/graph/seed.hpp"

namespace dualgnn {

struct ModelConfig {
  std::size_t hidden_dim = 16;
  std::size_t embed_dim = 16;
  std::size_t aux_hidden_dim = 16;
  std::size_t aux_embed_dim = 16;
  std::size_t clusters = 0;  // K
  double alpha = 0.7;
  // Treat the reconstructed adjacency as a constant in the backward pass.
  bool detach_asc = true;
  // Apply ELU after the second message-passing layer as well as the first.
  bool elu_on_output = true;

  /// Default configuration with K = k_multiplier * num_classes.
  static ModelConfig for_classes(int num_classes, double k_multiplier = 10.0) {
    ModelConfig c;
    c.clusters = static_cast<std::size_t>(std::llround(k_multiplier * num_classes));
    return c;
  }

  void validate(int num_classes) const {
    if (hidden_dim == 0 || embed_dim == 0 || aux_hidden_dim == 0 || aux_embed_dim == 0)
      throw std::invalid_argument("layer widths must be positive");
    if (clusters < static_cast<std::size_t>(num_classes) || clusters < 2)
      throw std::invalid_argument("cluster count K=" + std::to_string(clusters) +
                                  " must be >= number of classes and >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  }
};

enum class ParamGroup { PrimaryEncoder, PrimaryClassifier, ClusterHead, AuxEncoder, AuxClassifier };

/// Every learnable weight of the dual model.
struct DualModelParams {
  Parameter enc1, enc2;            // primary encoder
  Parameter cls_w, cls_b;          // primary classifier
  Parameter clu_w, clu_b;          // clustering head
  Parameter aux1, aux2;            // auxiliary encoder
  Parameter aux_cls_w, aux_cls_b;  // auxiliary classifier

  std::vector<Parameter*> group(ParamGroup g) {
    switch (g) {
      case ParamGroup::PrimaryEncoder: return {&enc1, &enc2};
      case ParamGroup::PrimaryClassifier: return {&cls_w, &cls_b};
      case ParamGroup::ClusterHead: return {&clu_w, &clu_b};
      case ParamGroup::AuxEncoder: return {&aux1, &aux2};
      case ParamGroup::AuxClassifier: return {&aux_cls_w, &aux_cls_b};
    }
    return {};
  }

  std::vector<Parameter*> all() {
    return {&enc1, &enc2, &cls_w, &cls_b, &clu_w, &clu_b, &aux1, &aux2, &aux_cls_w, &aux_cls_b};
  }

  /// Zero-valued parameters with shapes for the given problem.
  static DualModelParams zeros(std::size_t feature_dim, int num_classes, const ModelConfig& cfg) {
    auto z = [](std::size_t r, std::size_t c) {
      return Parameter(Matrix::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    };
    const auto C = static_cast<std::size_t>(num_classes);
    DualModelParams p;
    p.enc1 = z(feature_dim, cfg.hidden_dim);
    p.enc2 = z(cfg.hidden_dim, cfg.embed_dim);
    p.cls_w = z(cfg.embed_dim, C);
    p.cls_b = z(1, C);
    p.clu_w = z(cfg.embed_dim, cfg.clusters);
    p.clu_b = z(1, cfg.clusters);
    p.aux1 = z(cfg.embed_dim, cfg.aux_hidden_dim);
    p.aux2 = z(cfg.aux_hidden_dim, cfg.aux_embed_dim);
    p.aux_cls_w = z(cfg.aux_embed_dim, C);
    p.aux_cls_b = z(1, C);
    return p;
  }

  /// Glorot-uniform weights, zero biases. Groups are drawn in declaration
  /// order, so the primary weights for a seed do not depend on K.
  static DualModelParams glorot(std::size_t feature_dim, int num_classes, const ModelConfig& cfg, Seed seed) {
    DualModelParams p = zeros(feature_dim, num_classes, cfg);
    auto rng = make_rng(seed);
    for (Parameter* w : {&p.enc1, &p.enc2, &p.cls_w, &p.clu_w, &p.aux1, &p.aux2, &p.aux_cls_w}) {
      const double limit = std::sqrt(6.0 / static_cast<double>(w->value.rows() + w->value.cols()));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Eigen::Index i = 0; i < w->value.rows(); ++i)
        for (Eigen::Index j = 0; j < w->value.cols(); ++j) w->value(i, j) = u(rng);
    }
    return p;
  }
};

}  // namespace dualgnn
