#pragma once

#include "difight/signals.hpp"

#include <cstdint>
#include <vector>

namespace difight {

using Adjacency = Eigen::MatrixXi;

/// Symmetric 0/1 adjacency with zero diagonal; every unordered pair is an edge
/// independently with probability `p`. Deterministic for a fixed seed.
Adjacency generate_er_graph(int nodes, double p, std::uint64_t seed);

/// True iff every node is reachable from node 0 (depth-first search).
bool is_connected(const Adjacency& adjacency);

/// Column-normalizes (adjacency + I), or the bare adjacency when
/// `self_loops` is false, into a left-stochastic matrix with uniform weight
/// per in-neighbour: a_ji = 1/(d_i + 1) for j in N_i and j = i.
Matrix build_combination_matrix(const Adjacency& adjacency, bool self_loops = true);

/// Connected undirected network with its combination matrix.
class Network {
 public:
  /// Validates symmetry, zero diagonal and connectivity, then builds the
  /// combination matrix.
  static Network from_adjacency(Adjacency adjacency, bool self_loops = true);

  /// Uses a caller-supplied combination matrix; it must be left stochastic
  /// and supported on edges plus the diagonal.
  static Network from_parts(Adjacency adjacency, Matrix combination);

  int size() const { return static_cast<int>(adjacency_.rows()); }
  const Adjacency& adjacency() const { return adjacency_; }
  const Matrix& combination() const { return combination_; }
  const std::vector<int>& neighbors(int v) const { return neighbors_[static_cast<std::size_t>(v)]; }
  int degree(int v) const { return static_cast<int>(neighbors(v).size()); }
  std::vector<int> degrees() const;
  bool has_edge(int u, int v) const { return adjacency_(u, v) != 0; }

  /// Number of discarded disconnected samples before this one was accepted.
  int retries() const { return retries_; }
  void set_retries(int retries) { retries_ = retries; }

 private:
  Network(Adjacency adjacency, Matrix combination);

  Adjacency adjacency_;
  Matrix combination_;
  std::vector<std::vector<int>> neighbors_;
  int retries_ = 0;
};

struct NetworkOptions {
  int retry_budget = 10000;
  bool self_loops = true;
};

/// Resamples Erdős–Rényi graphs from one RNG stream until a connected one
/// appears. Throws GenerationFailed once the retry budget is spent.
Network generate_connected_network(int nodes, double p, std::uint64_t seed,
                                   const NetworkOptions& options = {});

/// ln(L)/L, the connectivity threshold edge probability.
double default_edge_probability(int nodes);

}  // namespace difight
