#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dualgnn/diff/sparse.hpp"

namespace dualgnn {

using Edge = std::pair<std::size_t, std::size_t>;

/// Transductive node-classification instance.
///
/// Masks are stored as sorted node-index lists; mask_bits() gives the boolean view.
/// A label of -1 marks a node whose class is unknown; every node in a mask
/// must carry a label in [0, num_classes).
struct Graph {
  Matrix features;
  SparseMatrix adjacency;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  std::size_t num_nodes() const { return labels.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features.cols()); }

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

inline std::vector<bool> mask_bits(const std::vector<std::size_t>& nodes, std::size_t n) {
  std::vector<bool> bits(n, false);
  for (auto i : nodes) bits.at(i) = true;
  return bits;
}

/// Upper-triangle (i < j) edges of a symmetric adjacency.
inline std::vector<Edge> undirected_edges(const SparseMatrix& a) {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (auto j : a.row_cols(i))
      if (i < j) out.emplace_back(i, j);
  return out;
}

/// Binary symmetric adjacency from undirected edges. Rejects self-loops and duplicates.
inline SparseMatrix adjacency_from_edges(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<Triplet> t;
  t.reserve(edges.size() * 2);
  for (auto [i, j] : edges) {
    if (i == j) throw std::invalid_argument("self-loop on node " + std::to_string(i));
    t.push_back({i, j, 1.0});
    t.push_back({j, i, 1.0});
  }
  return SparseMatrix::from_triplets(n, std::move(t));
}

inline void Graph::validate() const {
  const std::size_t n = num_nodes();
  if (static_cast<std::size_t>(features.rows()) != n)
    throw std::invalid_argument("feature rows (" + std::to_string(features.rows()) +
                                ") != node count (" + std::to_string(n) + ")");
  if (adjacency.size() != n) throw std::invalid_argument("adjacency size != node count");
  if (num_classes < 1) throw std::invalid_argument("num_classes must be positive");
  if (!features.allFinite()) throw std::invalid_argument("non-finite feature value");

  for (std::size_t i = 0; i < n; ++i) {
    auto c = adjacency.row_cols(i);
    auto v = adjacency.row_vals(i);
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k] == i) throw std::invalid_argument("self-loop on node " + std::to_string(i));
      if (v[k] != 1.0) throw std::invalid_argument("adjacency entries must be 0 or 1");
    }
  }
  if (!adjacency.is_symmetric()) throw std::invalid_argument("adjacency is not symmetric");

  std::vector<int> owner(n, -1);
  const std::vector<std::size_t>* masks[] = {&train, &val, &test};
  const char* names[] = {"train", "val", "test"};
  for (int m = 0; m < 3; ++m) {
    const auto& nodes = *masks[m];
    if (!std::is_sorted(nodes.begin(), nodes.end()))
      throw std::invalid_argument(std::string(names[m]) + " mask is not sorted");
    for (auto i : nodes) {
      if (i >= n)
        throw std::invalid_argument(std::string(names[m]) + " mask index " + std::to_string(i) +
                                    " out of range");
      if (owner[i] == m)
        throw std::invalid_argument(std::string(names[m]) + " mask repeats node " + std::to_string(i));
      if (owner[i] >= 0)
        throw std::invalid_argument("masks overlap at node " + std::to_string(i) + " (" +
                                    names[owner[i]] + " and " + names[m] + ")");
      owner[i] = m;
      if (labels[i] < 0 || labels[i] >= num_classes)
        throw std::invalid_argument(std::string(names[m]) + " node " + std::to_string(i) +
                                    " has no valid label");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] < -1 || labels[i] >= num_classes)
      throw std::invalid_argument("label of node " + std::to_string(i) + " out of range");
}

}  // namespace dualgnn
