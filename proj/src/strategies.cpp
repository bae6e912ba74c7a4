#include "difight/strategies.hpp"

#include "difight/cost.hpp"
#include "difight/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace difight {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_group_kind(StrategyKind kind) {
  return kind == StrategyKind::RGP || kind == StrategyKind::RGNP;
}

void check_distribution(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InvalidArgument("selection probabilities must all be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("selection probabilities must sum to 1");
}

// G for a drawn seed set: the seeds alone, or the seeds plus neighbourhoods.
NodeGroup expand(const NodeGroup& seeds, const Network& network, bool with_neighborhoods) {
  if (!with_neighborhoods) return seeds;
  std::vector<char> in(static_cast<std::size_t>(network.size()), 0);
  for (int s : seeds) {
    in[static_cast<std::size_t>(s)] = 1;
    for (int u : network.neighbors(s)) in[static_cast<std::size_t>(u)] = 1;
  }
  NodeGroup out;
  for (int v = 0; v < network.size(); ++v) {
    if (in[static_cast<std::size_t>(v)]) out.push_back(v);
  }
  return out;
}

bool closed_neighborhood_hits(const Network& network, int v, const NodeGroup& group) {
  for (int c : group) {
    if (c == v || network.has_edge(c, v)) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::DiFIGHT: return "DiFIGHT";
    case AlgorithmKind::MoDiFIGHT: return "MoDiFIGHT";
    case AlgorithmKind::ConsensusIHT: return "ConsensusIHT";
    case AlgorithmKind::NonCooperativeIHT: return "NonCooperativeIHT";
    case AlgorithmKind::CentralizedIHT: return "CentralizedIHT";
  }
  return "unknown";
}

std::optional<AlgorithmKind> parse_algorithm(std::string_view name) {
  const std::string n = lowercase(name);
  if (n == "difight") return AlgorithmKind::DiFIGHT;
  if (n == "modifight") return AlgorithmKind::MoDiFIGHT;
  if (n == "consensusiht" || n == "consensus") return AlgorithmKind::ConsensusIHT;
  if (n == "noncooperativeiht" || n == "noncooperative") return AlgorithmKind::NonCooperativeIHT;
  if (n == "centralizediht" || n == "centralized") return AlgorithmKind::CentralizedIHT;
  return std::nullopt;
}

double message_length(AlgorithmKind kind, Index sparsity, Index dimension) {
  switch (kind) {
    case AlgorithmKind::DiFIGHT:
      return static_cast<double>(2 * sparsity + dimension);
    case AlgorithmKind::MoDiFIGHT:
    case AlgorithmKind::ConsensusIHT:
      return static_cast<double>(2 * sparsity);
    case AlgorithmKind::NonCooperativeIHT:
    case AlgorithmKind::CentralizedIHT:
      return 0.0;
  }
  return 0.0;
}

double recursion_gain(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::DiFIGHT: return 2.0;
    case AlgorithmKind::MoDiFIGHT: return 4.0;
    default: throw InvalidArgument("error recursion defined only for DiFIGHT and MoDiFIGHT");
  }
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::RP: return "RP";
    case StrategyKind::RNP: return "RNP";
    case StrategyKind::RGP: return "RGP";
    case StrategyKind::RGNP: return "RGNP";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
  const std::string n = lowercase(name);
  if (n == "rp") return StrategyKind::RP;
  if (n == "rnp") return StrategyKind::RNP;
  if (n == "rgp") return StrategyKind::RGP;
  if (n == "rgnp") return StrategyKind::RGNP;
  return std::nullopt;
}

SelectionStrategy::SelectionStrategy(StrategyKind kind, int group_order,
                                     std::vector<double> weights, int weighted_nodes)
    : kind_(kind), group_order_(group_order), weights_(std::move(weights)),
      weighted_nodes_(weighted_nodes) {}

SelectionStrategy SelectionStrategy::uniform(StrategyKind kind, int group_order) {
  if (!is_group_kind(kind)) group_order = 1;
  if (group_order < 1) throw InvalidArgument("group order must be at least 1");
  return SelectionStrategy(kind, group_order, {}, 0);
}

SelectionStrategy SelectionStrategy::with_node_weights(StrategyKind kind,
                                                       std::vector<double> weights) {
  if (is_group_kind(kind)) throw InvalidArgument("node weights apply to RP and RNP only");
  check_distribution(weights);
  const int nodes = static_cast<int>(weights.size());
  return SelectionStrategy(kind, 1, std::move(weights), nodes);
}

SelectionStrategy SelectionStrategy::with_group_weights(StrategyKind kind, int nodes,
                                                        int group_order,
                                                        std::vector<double> weights) {
  if (!is_group_kind(kind)) throw InvalidArgument("group weights apply to RGP and RGNP only");
  if (nodes > 20) throw InvalidArgument("explicit group tables are limited to 20 nodes");
  if (group_order < 1 || group_order > nodes) throw InvalidArgument("group order outside [1, L]");
  if (static_cast<double>(weights.size()) != binomial(nodes, group_order)) {
    throw InvalidArgument("group weight table must have C(L, r) entries");
  }
  check_distribution(weights);
  return SelectionStrategy(kind, group_order, std::move(weights), nodes);
}

void SelectionStrategy::validate_for(int nodes) const {
  if (group_order_ > nodes) {
    throw InvalidArgument("group order " + std::to_string(group_order_) + " exceeds L = " +
                          std::to_string(nodes));
  }
  if (!is_uniform() && weighted_nodes_ != nodes) {
    throw InvalidArgument("selection weights were built for a different node count");
  }
}

double SelectionStrategy::node_weight(int v, int nodes) const {
  if (is_uniform()) return 1.0 / nodes;
  return weights_[static_cast<std::size_t>(v)];
}

std::vector<NodeGroup> enumerate_groups(int nodes, int group_order) {
  std::vector<NodeGroup> out;
  if (group_order < 0 || group_order > nodes) return out;
  NodeGroup combo(static_cast<std::size_t>(group_order));
  std::iota(combo.begin(), combo.end(), 0);
  while (true) {
    out.push_back(combo);
    int i = group_order - 1;
    while (i >= 0 && combo[static_cast<std::size_t>(i)] == nodes - group_order + i) --i;
    if (i < 0) break;
    ++combo[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < group_order; ++j) {
      combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

NodeGroup sample_group(const SelectionStrategy& strategy, const Network& network,
                       std::mt19937_64& rng) {
  const int nodes = network.size();
  strategy.validate_for(nodes);
  const bool neighborhoods =
      strategy.kind() == StrategyKind::RNP || strategy.kind() == StrategyKind::RGNP;

  NodeGroup seeds;
  if (!is_group_kind(strategy.kind())) {
    int v = 0;
    if (strategy.is_uniform()) {
      v = std::uniform_int_distribution<int>(0, nodes - 1)(rng);
    } else {
      const auto& w = strategy.weights();
      v = std::discrete_distribution<int>(w.begin(), w.end())(rng);
    }
    seeds.push_back(v);
  } else if (strategy.is_uniform()) {
    // Partial Fisher-Yates over node ids: uniform over all C(L, r) groups.
    NodeGroup pool(static_cast<std::size_t>(nodes));
    std::iota(pool.begin(), pool.end(), 0);
    const int r = strategy.group_order();
    for (int i = 0; i < r; ++i) {
      const int j = std::uniform_int_distribution<int>(i, nodes - 1)(rng);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    seeds.assign(pool.begin(), pool.begin() + r);
    std::sort(seeds.begin(), seeds.end());
  } else {
    const auto& w = strategy.weights();
    const auto index = std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng);
    // Unranking avoids holding the C(L, r) table for every draw.
    const int r = strategy.group_order();
    std::size_t rank = index;
    int next = 0;
    for (int slot = 0; slot < r; ++slot) {
      for (int candidate = next;; ++candidate) {
        const auto below = static_cast<std::size_t>(binomial(nodes - candidate - 1, r - slot - 1));
        if (rank < below) {
          seeds.push_back(candidate);
          next = candidate + 1;
          break;
        }
        rank -= below;
      }
    }
  }
  return expand(seeds, network, neighborhoods);
}

double participation_probability(const SelectionStrategy& strategy, const Network& network,
                                 int v) {
  const int nodes = network.size();
  strategy.validate_for(nodes);
  if (v < 0 || v >= nodes) throw InvalidArgument("node index out of range");
  const int degree = network.degree(v);
  const int r = strategy.group_order();

  switch (strategy.kind()) {
    case StrategyKind::RP:
      return strategy.node_weight(v, nodes);
    case StrategyKind::RNP: {
      double pi = strategy.node_weight(v, nodes);
      for (int u : network.neighbors(v)) pi += strategy.node_weight(u, nodes);
      return std::min(pi, 1.0);
    }
    case StrategyKind::RGP: {
      if (strategy.is_uniform()) return static_cast<double>(r) / nodes;
      const auto groups = enumerate_groups(nodes, r);
      double pi = 0.0;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (std::binary_search(groups[g].begin(), groups[g].end(), v)) pi += strategy.weights()[g];
      }
      return pi;
    }
    case StrategyKind::RGNP: {
      if (strategy.is_uniform()) {
        if (nodes - (degree + 1) < r) return 1.0;
        double miss = 1.0;
        for (int k = 0; k < r; ++k) {
          miss *= 1.0 - static_cast<double>(degree + 1) / static_cast<double>(nodes - k);
        }
        return 1.0 - miss;
      }
      const auto groups = enumerate_groups(nodes, r);
      double pi = 0.0;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (closed_neighborhood_hits(network, v, groups[g])) pi += strategy.weights()[g];
      }
      return pi;
    }
  }
  return 0.0;
}

std::vector<double> participation_probabilities(const SelectionStrategy& strategy,
                                                const Network& network) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(network.size()));
  for (int v = 0; v < network.size(); ++v) {
    out.push_back(participation_probability(strategy, network, v));
  }
  return out;
}

ParticipationProfile expected_comms(const std::optional<SelectionStrategy>& strategy,
                                    const Network& network, AlgorithmKind algorithm,
                                    Index sparsity, Index dimension) {
  const int nodes = network.size();
  ParticipationProfile profile;
  profile.message_length = message_length(algorithm, sparsity, dimension);
  profile.pi = strategy ? participation_probabilities(*strategy, network)
                        : std::vector<double>(static_cast<std::size_t>(nodes), 1.0);
  profile.transmit.resize(static_cast<std::size_t>(nodes));
  profile.receive.resize(static_cast<std::size_t>(nodes));
  for (int v = 0; v < nodes; ++v) {
    double neighbor_pi = 0.0;
    for (int u : network.neighbors(v)) neighbor_pi += profile.pi[static_cast<std::size_t>(u)];
    const auto i = static_cast<std::size_t>(v);
    profile.transmit[i] = neighbor_pi * profile.message_length;
    profile.receive[i] = profile.pi[i] * network.degree(v) * profile.message_length;
  }
  return profile;
}

double rnp_tabulated_transmit(const SelectionStrategy& strategy, const Network& network, int v) {
  if (strategy.kind() != StrategyKind::RNP) {
    throw InvalidArgument("tabulated transmit alternative is defined for RNP only");
  }
  const int nodes = network.size();
  double out = 0.0;
  for (int u : network.neighbors(v)) {
    out += participation_probability(strategy, network, u);
    for (int w : network.neighbors(u)) out += strategy.node_weight(w, nodes);
  }
  return out;
}

}  // namespace difight
