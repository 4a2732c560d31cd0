#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>

#include "dualgnn/diff/tape.hpp"

namespace dualgnn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  // Location of the worst entry.
  std::size_t param = 0;
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares reverse-mode gradients against central differences.
///
/// `loss` must build a scalar on the given tape from the parameters (by
/// calling tape.parameter(p)) and be deterministic. Per entry the error is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
inline GradCheckResult grad_check(const std::function<Tensor(Tape&)>& loss,
                                  std::span<Parameter* const> params, double step = 1e-3) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  auto evaluate = [&] {
    Tape tape;
    return loss(tape).item();
  };

  GradCheckResult worst;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
        const double saved = p.value(i, j);
        p.value(i, j) = saved + step;
        const double up = evaluate();
        p.value(i, j) = saved - step;
        const double down = evaluate();
        p.value(i, j) = saved;

        const double numeric = (up - down) / (2.0 * step);
        const double analytic = p.grad(i, j);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        const double err = std::abs(analytic - numeric) / denom;
        if (err > worst.max_rel_error)
          worst = {err, k, i, j, analytic, numeric};
      }
    }
  }
  return worst;
}

}  // namespace dualgnn
