#pragma once

#include "difight/network.hpp"
#include "difight/signals.hpp"

#include <random>

namespace difight::testing {

inline Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

inline Vector gaussian_vector(Index n, std::mt19937_64& rng) {
  return gaussian_matrix(n, 1, rng);
}

inline Vector random_sparse(Index n, Index k, std::mt19937_64& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::normal_distribution<double> normal;
  Vector x = Vector::Zero(n);
  for (Index i = 0; i < k; ++i) x[idx[static_cast<std::size_t>(i)]] = normal(rng);
  return x;
}

inline Adjacency path_graph(int nodes) {
  Adjacency a = Adjacency::Zero(nodes, nodes);
  for (int i = 0; i + 1 < nodes; ++i) a(i, i + 1) = a(i + 1, i) = 1;
  return a;
}

inline Adjacency star_graph(int nodes) {
  Adjacency a = Adjacency::Zero(nodes, nodes);
  for (int i = 1; i < nodes; ++i) a(0, i) = a(i, 0) = 1;
  return a;
}

inline Adjacency cycle_graph(int nodes) {
  Adjacency a = path_graph(nodes);
  a(0, nodes - 1) = a(nodes - 1, 0) = 1;
  return a;
}

inline Adjacency complete_graph(int nodes) {
  Adjacency a = Adjacency::Ones(nodes, nodes);
  a.diagonal().setZero();
  return a;
}

}  // namespace difight::testing
