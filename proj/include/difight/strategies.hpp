#pragma once

#include "difight/algorithm.hpp"
#include "difight/network.hpp"

#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace difight {

enum class StrategyKind { RP, RNP, RGP, RGNP };

std::string_view to_string(StrategyKind kind);
std::optional<StrategyKind> parse_strategy(std::string_view name);

/// Sorted node indices activated in one step.
using NodeGroup = std::vector<int>;

/// Randomized node selection.
///
///   RP    one node v drawn from p_v;                 G = {v}
///   RNP   one node v drawn from p_v;                 G = {v} u N_v
///   RGP   r-group C drawn from p_C;                  G = C
///   RGNP  r-group C drawn from p_C;                  G = C u (u_{c in C} N_c)
///
/// Uniform distributions are the default. Non-uniform RGP/RGNP weights are an
/// explicit table over all C(L, r) groups in lexicographic order (L <= 20).
class SelectionStrategy {
 public:
  static SelectionStrategy uniform(StrategyKind kind, int group_order = 1);
  /// RP/RNP with node probabilities; entries must be positive and sum to 1.
  static SelectionStrategy with_node_weights(StrategyKind kind, std::vector<double> weights);
  /// RGP/RGNP with group probabilities over lexicographically ordered groups.
  static SelectionStrategy with_group_weights(StrategyKind kind, int nodes, int group_order,
                                              std::vector<double> weights);

  StrategyKind kind() const { return kind_; }
  int group_order() const { return group_order_; }
  bool is_uniform() const { return weights_.empty(); }
  const std::vector<double>& weights() const { return weights_; }

  /// Throws InvalidArgument when the strategy cannot run on `nodes` nodes.
  void validate_for(int nodes) const;

  /// Probability of drawing node v (RP/RNP).
  double node_weight(int v, int nodes) const;

 private:
  SelectionStrategy(StrategyKind kind, int group_order, std::vector<double> weights,
                    int weighted_nodes);

  StrategyKind kind_;
  int group_order_;
  std::vector<double> weights_;
  int weighted_nodes_ = 0;  // node count the weight table was built for
};

/// All r-subsets of {0..nodes-1} in lexicographic order.
std::vector<NodeGroup> enumerate_groups(int nodes, int group_order);

/// Draws the participating group G for one step.
NodeGroup sample_group(const SelectionStrategy& strategy, const Network& network,
                       std::mt19937_64& rng);

/// Probability that node v belongs to G in a given step.
double participation_probability(const SelectionStrategy& strategy, const Network& network,
                                 int v);
std::vector<double> participation_probabilities(const SelectionStrategy& strategy,
                                                const Network& network);

/// Expected per-step communication of each node.
struct ParticipationProfile {
  std::vector<double> pi;        // participation probability (1 when deterministic)
  std::vector<double> transmit;  // expected values sent per step
  std::vector<double> receive;   // expected values received per step
  double message_length = 0.0;   // L_algo
};

/// Receive: pi_v d_v L_algo. Transmit: sum_{u in N_v} pi_u L_algo. Without a
/// strategy every node participates and T(v) = R(v) = d_v L_algo.
ParticipationProfile expected_comms(const std::optional<SelectionStrategy>& strategy,
                                    const Network& network, AlgorithmKind algorithm,
                                    Index sparsity, Index dimension);

/// The tabulated general-distribution RNP transmit entry,
/// sum_{u in N_v} pi_u + sum_{u in N_v, w in N_u} p_w, in units of L_algo.
/// Reported alongside the derived value; it is not used by the simulator.
double rnp_tabulated_transmit(const SelectionStrategy& strategy, const Network& network, int v);

}  // namespace difight
