#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualgnn/graph/graph.hpp"
#include "dualgnn/graph/seed.hpp"

namespace dualgnn {

struct SbmConfig {
  std::size_t blocks = 4;
  std::size_t nodes_per_block = 100;
  double p_intra = 0.05;
  double q_inter = 0.005;
  std::size_t feature_dim = 16;
  double feature_noise = 1.0;
  // Mask sizes: train is per class, val and test are totals.
  std::size_t train_per_class = 20;
  std::size_t val_size = 80;
  std::size_t test_size = 200;
};

/// Stochastic block model graph with Gaussian class-conditional features.
///
/// Node i belongs to block i / nodes_per_block. Every pair is an independent
/// Bernoulli trial with p_intra inside a block and q_inter across blocks.
/// Each class mean is a random unit vector; features add iid N(0, noise^2).
inline Graph generate_sbm(const SbmConfig& cfg, Seed seed) {
  if (cfg.blocks < 1 || cfg.nodes_per_block < 1) throw std::invalid_argument("sbm: empty block structure");
  if (!(cfg.q_inter >= 0.0 && cfg.q_inter <= cfg.p_intra && cfg.p_intra <= 1.0))
    throw std::invalid_argument("sbm: need 0 <= q_inter <= p_intra <= 1");
  if (cfg.feature_dim < 1) throw std::invalid_argument("sbm: feature_dim must be positive");
  if (!(cfg.feature_noise >= 0.0)) throw std::invalid_argument("sbm: feature_noise must be >= 0");
  const std::size_t n = cfg.blocks * cfg.nodes_per_block;
  if (cfg.train_per_class > cfg.nodes_per_block ||
      cfg.train_per_class * cfg.blocks + cfg.val_size + cfg.test_size > n)
    throw std::invalid_argument("sbm: mask sizes exceed node count");

  Graph g;
  g.num_classes = static_cast<int>(cfg.blocks);
  g.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.labels[i] = static_cast<int>(i / cfg.nodes_per_block);

  auto edge_rng = make_rng(derive_seed(seed, {0}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = g.labels[i] == g.labels[j] ? cfg.p_intra : cfg.q_inter;
      if (unit(edge_rng) < p) edges.emplace_back(i, j);
    }
  g.adjacency = adjacency_from_edges(n, edges);

  auto feat_rng = make_rng(derive_seed(seed, {1}));
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(cfg.feature_dim);
  Matrix means(static_cast<Eigen::Index>(cfg.blocks), d);
  for (Eigen::Index c = 0; c < means.rows(); ++c) {
    do {
      for (Eigen::Index k = 0; k < d; ++k) means(c, k) = normal(feat_rng);
    } while (means.row(c).norm() == 0.0);
    means.row(c).normalize();
  }
  g.features.resize(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k)
      g.features(static_cast<Eigen::Index>(i), k) =
          means(g.labels[i], k) + cfg.feature_noise * normal(feat_rng);

  auto mask_rng = make_rng(derive_seed(seed, {2}));
  std::vector<std::size_t> rest;
  for (std::size_t c = 0; c < cfg.blocks; ++c) {
    std::vector<std::size_t> block(cfg.nodes_per_block);
    for (std::size_t k = 0; k < block.size(); ++k) block[k] = c * cfg.nodes_per_block + k;
    std::shuffle(block.begin(), block.end(), mask_rng);
    g.train.insert(g.train.end(), block.begin(), block.begin() + static_cast<std::ptrdiff_t>(cfg.train_per_class));
    rest.insert(rest.end(), block.begin() + static_cast<std::ptrdiff_t>(cfg.train_per_class), block.end());
  }
  std::shuffle(rest.begin(), rest.end(), mask_rng);
  g.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(cfg.val_size));
  g.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(cfg.val_size),
                rest.begin() + static_cast<std::ptrdiff_t>(cfg.val_size + cfg.test_size));
  std::sort(g.train.begin(), g.train.end());
  std::sort(g.val.begin(), g.val.end());
  std::sort(g.test.begin(), g.test.end());
  return g;
}

}  // namespace dualgnn
