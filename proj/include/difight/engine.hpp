#pragma once

#include "difight/algorithm.hpp"
#include "difight/cost.hpp"
#include "difight/network.hpp"
#include "difight/strategies.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace difight {

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::DiFIGHT;
  Index sparsity = 1;
  std::vector<double> step_sizes;  // one per node; one entry for CentralizedIHT
  int max_iterations = 500;
  std::optional<SelectionStrategy> strategy;  // absent: every node, every step
  bool early_stop = true;
  double stop_tolerance = 1e-12;
  int snapshot_every = 0;  // keep estimates every k iterations; 0 keeps only the ends

  void validate(int nodes) const;
};

/// Per-node communication counters, in scalar values.
struct CommCounters {
  std::vector<std::uint64_t> transmitted;
  std::vector<std::uint64_t> received;
  std::uint64_t gradient_evaluations = 0;

  explicit CommCounters(int nodes = 0)
      : transmitted(static_cast<std::size_t>(nodes), 0),
        received(static_cast<std::size_t>(nodes), 0) {}
  std::uint64_t total_transmitted() const;
  std::uint64_t total_received() const;
};

enum class StopReason { MaxIterations, Converged };
std::string_view to_string(StopReason reason);

struct Snapshot {
  int iteration = 0;
  std::vector<Vector> estimates;
};

/// Everything recorded by run(). Index n of `errors`, `msd`, `transmitted`
/// and `received` is the state after n steps (n = 0 is the initial state).
struct RunTrace {
  AlgorithmKind algorithm = AlgorithmKind::DiFIGHT;
  std::optional<StrategyKind> strategy;
  std::uint64_t seed = 0;
  int iterations = 0;
  StopReason stop_reason = StopReason::MaxIterations;

  std::vector<Vector> errors;  // h^n: ||x_i^n - x*||_2 per node
  std::vector<double> msd;     // mean_i ||x_i^n - x*||^2 / ||x*||^2
  std::vector<std::vector<std::uint64_t>> transmitted;  // cumulative per node
  std::vector<std::vector<std::uint64_t>> received;
  std::vector<NodeGroup> groups;  // participation log, one entry per step
  std::vector<Snapshot> snapshots;
  std::vector<Vector> final_estimates;
  std::uint64_t gradient_evaluations = 0;

  int nodes() const { return errors.empty() ? 0 : static_cast<int>(errors.front().size()); }
  std::uint64_t total_transmitted() const;
  std::uint64_t total_received() const;
};

/// x_i <- H_K(sum_j a_ji (x_j - mu_j grad f_j(x_j))).
std::vector<Vector> step_difight(const Network& network, std::span<const LeastSquaresCost> costs,
                                 std::span<const Vector> estimates,
                                 std::span<const double> step_sizes, Index sparsity,
                                 CommCounters* counters = nullptr);

/// As step_difight, but each intermediate is thresholded before exchange.
std::vector<Vector> step_modifight(const Network& network, std::span<const LeastSquaresCost> costs,
                                   std::span<const Vector> estimates,
                                   std::span<const double> step_sizes, Index sparsity,
                                   CommCounters* counters = nullptr);

/// phi_i = sum_j a_ji x_j, then x_i <- H_K(phi_i - mu_i grad f_i(phi_i)).
std::vector<Vector> step_consensus_iht(const Network& network,
                                       std::span<const LeastSquaresCost> costs,
                                       std::span<const Vector> estimates,
                                       std::span<const double> step_sizes, Index sparsity,
                                       CommCounters* counters = nullptr);

/// One partial-participation step. Nodes in G or adjacent to G form their
/// intermediates; nodes in G combine over their closed neighbourhood; all
/// others keep their estimate. Receive counters grow by d_v L_algo for v in
/// G, transmit counters by L_algo per neighbour in G.
std::vector<Vector> step_randomized(const Network& network,
                                    std::span<const LeastSquaresCost> costs,
                                    std::span<const Vector> estimates,
                                    std::span<const double> step_sizes, Index sparsity,
                                    const NodeGroup& group, AlgorithmKind kind,
                                    CommCounters* counters = nullptr);

/// x <- H_K(x - mu grad f(x)) for a single cost.
Vector step_iht(const LeastSquaresCost& cost, const Vector& estimate, double step_size,
                Index sparsity);

/// Runs `spec` from zero initial estimates. NonCooperativeIHT runs one IHT per
/// node with no exchange; CentralizedIHT stacks all costs into one node.
/// Throws DivergenceError if an estimate stops being finite.
RunTrace run(const AlgorithmSpec& spec, const Network& network,
             std::span<const LeastSquaresCost> costs, const Vector& x_star, std::uint64_t seed);

/// Per-node errors and relative MSD of a set of estimates.
Vector error_norms(std::span<const Vector> estimates, const Vector& x_star);
double relative_msd(std::span<const Vector> estimates, const Vector& x_star);

}  // namespace difight
