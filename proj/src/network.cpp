#include "difight/network.hpp"

#include "difight/errors.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace difight {

namespace {

void check_square(const Adjacency& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw InvalidArgument("adjacency matrix is not square");
  }
}

void check_undirected(const Adjacency& adjacency) {
  check_square(adjacency);
  const Index n = adjacency.rows();
  for (Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0) throw InvalidArgument("adjacency has a self-edge");
    for (Index j = 0; j < n; ++j) {
      const int a = adjacency(i, j);
      if (a != 0 && a != 1) throw InvalidArgument("adjacency entries must be 0 or 1");
      if (a != adjacency(j, i)) throw InvalidArgument("adjacency is not symmetric");
    }
  }
}

Adjacency sample_er(int nodes, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Adjacency adjacency = Adjacency::Zero(nodes, nodes);
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 1; j < nodes; ++j) {
      if (unit(rng) < p) {
        adjacency(i, j) = 1;
        adjacency(j, i) = 1;
      }
    }
  }
  return adjacency;
}

void check_er_parameters(int nodes, double p) {
  if (nodes < 2) throw InvalidArgument("need at least 2 nodes, got " + std::to_string(nodes));
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("edge probability outside [0, 1]");
}

}  // namespace

Adjacency generate_er_graph(int nodes, double p, std::uint64_t seed) {
  check_er_parameters(nodes, p);
  std::mt19937_64 rng(seed);
  return sample_er(nodes, p, rng);
}

bool is_connected(const Adjacency& adjacency) {
  check_square(adjacency);
  const Index n = adjacency.rows();
  if (n == 0) return true;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Index> stack{0};
  seen[0] = 1;
  Index reached = 1;
  while (!stack.empty()) {
    const Index u = stack.back();
    stack.pop_back();
    for (Index v = 0; v < n; ++v) {
      if (adjacency(u, v) != 0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == n;
}

Matrix build_combination_matrix(const Adjacency& adjacency, bool self_loops) {
  check_square(adjacency);
  Matrix weights = adjacency.cast<double>();
  if (self_loops) weights += Matrix::Identity(weights.rows(), weights.cols());
  for (Index col = 0; col < weights.cols(); ++col) {
    const double total = weights.col(col).sum();
    if (total <= 0.0) {
      throw InternalError("zero column " + std::to_string(col) + " in combination matrix");
    }
    weights.col(col) /= total;
  }
  return weights;
}

Network::Network(Adjacency adjacency, Matrix combination)
    : adjacency_(std::move(adjacency)), combination_(std::move(combination)) {
  const int n = size();
  neighbors_.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      if (adjacency_(v, u) != 0) neighbors_[static_cast<std::size_t>(v)].push_back(u);
    }
  }
}

Network Network::from_adjacency(Adjacency adjacency, bool self_loops) {
  check_undirected(adjacency);
  if (!is_connected(adjacency)) throw InvalidArgument("network graph is not connected");
  Matrix combination = build_combination_matrix(adjacency, self_loops);
  return Network(std::move(adjacency), std::move(combination));
}

Network Network::from_parts(Adjacency adjacency, Matrix combination) {
  check_undirected(adjacency);
  if (!is_connected(adjacency)) throw InvalidArgument("network graph is not connected");
  const Index n = adjacency.rows();
  if (combination.rows() != n || combination.cols() != n) {
    throw InvalidArgument("combination matrix shape does not match adjacency");
  }
  for (Index col = 0; col < n; ++col) {
    if (std::abs(combination.col(col).sum() - 1.0) > 1e-9) {
      throw InvalidArgument("combination matrix column " + std::to_string(col) +
                            " does not sum to 1");
    }
    for (Index row = 0; row < n; ++row) {
      const double a = combination(row, col);
      if (a < 0.0) throw InvalidArgument("combination matrix has a negative entry");
      if (a > 0.0 && row != col && adjacency(row, col) == 0) {
        throw InvalidArgument("combination weight on a non-edge");
      }
    }
  }
  return Network(std::move(adjacency), std::move(combination));
}

std::vector<int> Network::degrees() const {
  std::vector<int> out;
  out.reserve(neighbors_.size());
  for (const auto& nb : neighbors_) out.push_back(static_cast<int>(nb.size()));
  return out;
}

Network generate_connected_network(int nodes, double p, std::uint64_t seed,
                                   const NetworkOptions& options) {
  check_er_parameters(nodes, p);
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt <= options.retry_budget; ++attempt) {
    Adjacency adjacency = sample_er(nodes, p, rng);
    if (is_connected(adjacency)) {
      Network network = Network::from_adjacency(std::move(adjacency), options.self_loops);
      network.set_retries(attempt);
      return network;
    }
  }
  std::ostringstream msg;
  msg << "no connected graph after " << options.retry_budget << " retries (L=" << nodes
      << ", p=" << p << ")";
  throw GenerationFailed(msg.str());
}

double default_edge_probability(int nodes) {
  return std::log(static_cast<double>(nodes)) / static_cast<double>(nodes);
}

}  // namespace difight
