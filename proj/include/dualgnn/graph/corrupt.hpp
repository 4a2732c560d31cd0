#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualgnn/graph/graph.hpp"
#include "dualgnn/graph/seed.hpp"

namespace dualgnn {

/// Removes exactly round(rate * |E|) undirected edges, chosen uniformly
/// without replacement. Both directed entries of an edge go together.
inline Graph drop_edges(const Graph& g, double rate, Seed seed) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw std::invalid_argument("edge drop rate must lie in [0, 1], got " + std::to_string(rate));
  std::vector<Edge> edges = undirected_edges(g.adjacency);
  const auto drop = static_cast<std::size_t>(std::llround(rate * static_cast<double>(edges.size())));
  auto rng = make_rng(seed);
  std::shuffle(edges.begin(), edges.end(), rng);
  edges.resize(edges.size() - drop);
  std::sort(edges.begin(), edges.end());

  Graph out = g;
  out.adjacency = adjacency_from_edges(g.num_nodes(), edges);
  return out;
}

/// Number of train nodes per class, indexed by class.
inline std::vector<std::size_t> train_counts(const Graph& g) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(g.num_classes), 0);
  for (auto i : g.train) ++counts[static_cast<std::size_t>(g.labels[i])];
  return counts;
}

/// Keeps exactly `per_class` train nodes of every class, sampled uniformly from
/// the current train mask. Validation and test masks are untouched.
inline Graph subsample_labels(const Graph& g, std::size_t per_class, Seed seed) {
  if (per_class < 1) throw std::invalid_argument("labels per class must be at least 1");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(g.num_classes));
  for (auto i : g.train) by_class[static_cast<std::size_t>(g.labels[i])].push_back(i);

  auto rng = make_rng(seed);
  std::vector<std::size_t> train;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& pool = by_class[c];
    if (pool.size() < per_class)
      throw std::invalid_argument("class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                                  " training nodes, " + std::to_string(per_class) + " requested");
    std::shuffle(pool.begin(), pool.end(), rng);
    train.insert(train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  std::sort(train.begin(), train.end());

  Graph out = g;
  out.train = std::move(train);
  return out;
}

}  // namespace dualgnn
