#pragma once

// Fixtures and independent dense oracles shared by the unit tests.

#include <cmath>
#include <random>
#include <vector>

#include "dualgnn/dualgnn.hpp"

namespace dualgnn::testing {

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

/// Scalar u^T X v with random u, v, so every entry of X gets its own weight.
inline Tensor readout(Tape& t, const Tensor& x, std::mt19937_64& rng) {
  const Matrix u = random_matrix(1, x.rows(), rng), v = random_matrix(x.cols(), 1, rng);
  return sum(matmul(matmul(t.constant(u), x), t.constant(v)));
}

/// Random symmetric 0/1 adjacency without self-loops.
inline SparseMatrix random_adjacency(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution b(p);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (b(rng)) edges.emplace_back(i, j);
  return adjacency_from_edges(n, edges);
}

/// Random symmetric nonnegative weighted matrix (diagonal allowed).
inline SparseMatrix random_weighted(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution b(p);
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      if (b(rng)) {
        const double v = w(rng);
        t.push_back({i, j, v});
        if (i != j) t.push_back({j, i, v});
      }
  return SparseMatrix::from_triplets(n, std::move(t));
}

inline Matrix dense_normalize_sym(const Matrix& a) {
  Eigen::VectorXd d = a.rowwise().sum();
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (d(i) > 0 && d(j) > 0) out(i, j) = a(i, j) / std::sqrt(d(i) * d(j));
  return out;
}

/// Dense evaluation of the min-cut loss terms: (cut, regularizer).
inline std::pair<double, double> dense_mincut(const Matrix& s, const Matrix& a_norm) {
  Matrix d = Matrix::Zero(a_norm.rows(), a_norm.cols());
  for (Eigen::Index i = 0; i < a_norm.rows(); ++i) d(i, i) = a_norm.row(i).sum();
  const double cut = -(s.transpose() * a_norm * s).trace() / (s.transpose() * d * s).trace();
  Matrix g = s.transpose() * s;
  const double k = static_cast<double>(s.cols());
  Matrix t = g / g.norm() - Matrix::Identity(s.cols(), s.cols()) / std::sqrt(k);
  return {cut, t.norm()};
}

/// Textbook two-pass Pearson correlation with the library's conventions.
inline double oracle_pearson(const Matrix& s, Eigen::Index i, Eigen::Index j) {
  bool same = true;
  for (Eigen::Index c = 0; c < s.cols(); ++c) same = same && s(i, c) == s(j, c);
  if (same) return 1.0;
  const auto k = s.cols();
  double mi = 0.0, mj = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) mi += s(i, c);
  for (Eigen::Index c = 0; c < k; ++c) mj += s(j, c);
  mi /= static_cast<double>(k);
  mj /= static_cast<double>(k);
  double sii = 0.0, sjj = 0.0, sij = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) sii += (s(i, c) - mi) * (s(i, c) - mi);
  for (Eigen::Index c = 0; c < k; ++c) sjj += (s(j, c) - mj) * (s(j, c) - mj);
  for (Eigen::Index c = 0; c < k; ++c) sij += (s(i, c) - mi) * (s(j, c) - mj);
  const double ni = std::sqrt(sii), nj = std::sqrt(sjj);
  if (ni == 0.0 || nj == 0.0) return 0.0;
  return std::clamp(sij / (ni * nj), -1.0, 1.0);
}

/// O(N^2) pairwise threshold oracle for the reconstructed adjacency.
inline Matrix oracle_adjacency(const Matrix& s, double alpha) {
  const auto n = s.rows();
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = oracle_pearson(s, std::min(i, j), std::max(i, j));
      if (r >= alpha) a(i, j) = r;
    }
  }
  return a;
}

/// 12 nodes in three loosely linked groups; two labeled nodes per class.
inline Graph toy_graph(std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  Graph g;
  g.num_classes = 3;
  const std::size_t n = 12;
  g.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.labels[i] = static_cast<int>(i / 4);
  std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}, {0, 3}, {4, 5}, {5, 6}, {6, 7}, {4, 6},
                          {8, 9}, {9, 10}, {10, 11}, {8, 11}, {3, 4}, {7, 8}, {1, 9}};
  g.adjacency = adjacency_from_edges(n, edges);
  g.features = random_matrix(static_cast<Eigen::Index>(n), 5, rng);
  for (std::size_t i = 0; i < n; ++i) g.features(static_cast<Eigen::Index>(i), g.labels[i]) += 1.0;
  g.train = {0, 1, 4, 5, 8, 9};
  g.val = {2, 6, 10};
  g.test = {3, 7, 11};
  g.validate();
  return g;
}

/// C disjoint cliques with noiseless class features.
inline Graph clique_graph(std::size_t blocks = 4, std::size_t per_block = 25, std::uint64_t seed = 3) {
  SbmConfig cfg;
  cfg.blocks = blocks;
  cfg.nodes_per_block = per_block;
  cfg.p_intra = 1.0;
  cfg.q_inter = 0.0;
  cfg.feature_noise = 0.0;
  cfg.train_per_class = 5;
  cfg.val_size = 10;
  cfg.test_size = 40;
  return generate_sbm(cfg, Seed{seed});
}

/// The joint objective L_CE + L~_CE + L_sc for one forward pass.
inline Tensor dual_objective(Tape& tape, const Graph& g, const GraphOperators& ops, DualModelParams& params,
                             const ModelConfig& cfg, const SparseMatrix* fixed_asc = nullptr) {
  ForwardOptions opt;
  opt.fixed_asc = fixed_asc;
  DualOutputs out = forward_dual(tape, ops, params, cfg, opt);
  Tensor ce = cross_entropy_masked(out.primary.logits, g.labels, g.train);
  Tensor ce_aux = cross_entropy_masked(out.auxiliary.logits, g.labels, g.train);
  Tensor sc = mincut_loss(out.assignment, ops.normalized, ops.normalized_degree).total;
  return joint_loss(tape, ce, ce_aux, sc).total;
}

/// Threshold in the middle of the widest gap between sorted pairwise
/// correlations inside [lo, hi], so small parameter perturbations never move
/// a pair across it. Returns the threshold and the gap width.
inline std::pair<double, double> alpha_in_gap(const Matrix& s, double lo = 0.3, double hi = 0.9) {
  std::vector<double> rs{lo, hi};
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = i + 1; j < s.rows(); ++j) {
      const double r = oracle_pearson(s, i, j);
      if (r > lo && r < hi) rs.push_back(r);
    }
  std::sort(rs.begin(), rs.end());
  double best = 0.0, alpha = 0.5 * (lo + hi);
  for (std::size_t k = 1; k < rs.size(); ++k)
    if (rs[k] - rs[k - 1] > best) {
      best = rs[k] - rs[k - 1];
      alpha = 0.5 * (rs[k] + rs[k - 1]);
    }
  return {alpha, best};
}

}  // namespace dualgnn::testing
