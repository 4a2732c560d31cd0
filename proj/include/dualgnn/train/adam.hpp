#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "dualgnn/diff/tape.hpp"

namespace dualgnn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// First and second moments for a fixed list of parameters.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long step = 0;

  explicit AdamState(std::span<Parameter* const> params) {
    for (Parameter* p : params) {
      m.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
};

/// One Adam update with bias correction. Weight decay is coupled: it is added
/// to the gradient (g + wd * p) before the moments are updated.
inline void adam_step(std::span<Parameter* const> params, AdamState& state, double lr, const AdamConfig& cfg) {
  if (params.size() != state.m.size()) throw std::invalid_argument("adam_step: state built for other parameters");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Matrix g = p.grad;
    if (cfg.weight_decay != 0.0) g += cfg.weight_decay * p.value;
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    const auto m_hat = state.m[k].array() / c1;
    const auto v_hat = state.v[k].array() / c2;
    p.value.array() -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
  }
}

}  // namespace dualgnn
