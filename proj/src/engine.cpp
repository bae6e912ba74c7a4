#include "difight/engine.hpp"

#include "difight/errors.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace difight {

namespace {

void check_inputs(const Network& network, std::span<const LeastSquaresCost> costs,
                  std::span<const Vector> estimates, std::span<const double> step_sizes,
                  Index sparsity) {
  const auto nodes = static_cast<std::size_t>(network.size());
  if (costs.size() != nodes || estimates.size() != nodes || step_sizes.size() != nodes) {
    throw InvalidArgument("costs, estimates and step sizes must have one entry per node");
  }
  const Index n = costs.front().dimension();
  for (std::size_t i = 0; i < nodes; ++i) {
    if (costs[i].dimension() != n || estimates[i].size() != n) {
      throw InvalidArgument("node " + std::to_string(i) + " has inconsistent dimension");
    }
  }
  if (sparsity < 0 || sparsity > n) throw InvalidArgument("sparsity outside [0, N]");
}

// psi_j = x_j - mu_j grad f_j(x_j), optionally thresholded.
Vector intermediate(const LeastSquaresCost& cost, const Vector& x, double mu, Index sparsity,
                    bool threshold) {
  Vector psi = x - mu * cost.gradient(x);
  return threshold ? hard_threshold_values(psi, sparsity) : psi;
}

std::uint64_t as_count(double values) { return static_cast<std::uint64_t>(values); }

void charge_full_exchange(const Network& network, double message, CommCounters* counters) {
  if (counters == nullptr) return;
  for (int v = 0; v < network.size(); ++v) {
    const auto amount = as_count(network.degree(v) * message);
    counters->transmitted[static_cast<std::size_t>(v)] += amount;
    counters->received[static_cast<std::size_t>(v)] += amount;
  }
}

std::vector<Vector> diffusion_step(const Network& network,
                                   std::span<const LeastSquaresCost> costs,
                                   std::span<const Vector> estimates,
                                   std::span<const double> step_sizes, Index sparsity,
                                   AlgorithmKind kind, CommCounters* counters) {
  check_inputs(network, costs, estimates, step_sizes, sparsity);
  const int nodes = network.size();
  const bool inner = kind == AlgorithmKind::MoDiFIGHT;
  std::vector<Vector> psi;
  psi.reserve(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) {
    const auto i = static_cast<std::size_t>(j);
    psi.push_back(intermediate(costs[i], estimates[i], step_sizes[i], sparsity, inner));
  }
  const Matrix& a = network.combination();
  std::vector<Vector> next;
  next.reserve(psi.size());
  for (int i = 0; i < nodes; ++i) {
    Vector combined = Vector::Zero(estimates[0].size());
    for (int j = 0; j < nodes; ++j) {
      if (a(j, i) != 0.0) combined += a(j, i) * psi[static_cast<std::size_t>(j)];
    }
    next.push_back(hard_threshold_values(combined, sparsity));
  }
  if (counters != nullptr) counters->gradient_evaluations += static_cast<std::uint64_t>(nodes);
  charge_full_exchange(network, message_length(kind, sparsity, estimates[0].size()), counters);
  return next;
}

void check_sparse(const std::vector<Vector>& estimates, Index sparsity) {
  for (const auto& x : estimates) {
    if (count_nonzeros(x) > sparsity) throw InternalError("iterate exceeds the sparsity budget");
  }
}

}  // namespace

void AlgorithmSpec::validate(int nodes) const {
  if (max_iterations < 0) throw InvalidArgument("iteration count must be nonnegative");
  const std::size_t expected =
      kind == AlgorithmKind::CentralizedIHT ? 1 : static_cast<std::size_t>(nodes);
  if (step_sizes.size() != expected) {
    throw InvalidArgument("expected " + std::to_string(expected) + " step sizes, got " +
                          std::to_string(step_sizes.size()));
  }
  for (double mu : step_sizes) {
    if (!(mu > 0.0)) throw InvalidArgument("step sizes must be positive");
  }
  if (strategy) {
    if (kind == AlgorithmKind::NonCooperativeIHT || kind == AlgorithmKind::CentralizedIHT) {
      throw InvalidArgument(std::string(to_string(kind)) + " does not use node selection");
    }
    strategy->validate_for(nodes);
  }
}

std::uint64_t CommCounters::total_transmitted() const {
  std::uint64_t total = 0;
  for (auto t : transmitted) total += t;
  return total;
}

std::uint64_t CommCounters::total_received() const {
  std::uint64_t total = 0;
  for (auto r : received) total += r;
  return total;
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::Converged ? "converged" : "max_iterations";
}

std::uint64_t RunTrace::total_transmitted() const {
  std::uint64_t total = 0;
  if (!transmitted.empty()) for (auto t : transmitted.back()) total += t;
  return total;
}

std::uint64_t RunTrace::total_received() const {
  std::uint64_t total = 0;
  if (!received.empty()) for (auto r : received.back()) total += r;
  return total;
}

std::vector<Vector> step_difight(const Network& network, std::span<const LeastSquaresCost> costs,
                                 std::span<const Vector> estimates,
                                 std::span<const double> step_sizes, Index sparsity,
                                 CommCounters* counters) {
  return diffusion_step(network, costs, estimates, step_sizes, sparsity, AlgorithmKind::DiFIGHT,
                        counters);
}

std::vector<Vector> step_modifight(const Network& network, std::span<const LeastSquaresCost> costs,
                                   std::span<const Vector> estimates,
                                   std::span<const double> step_sizes, Index sparsity,
                                   CommCounters* counters) {
  return diffusion_step(network, costs, estimates, step_sizes, sparsity, AlgorithmKind::MoDiFIGHT,
                        counters);
}

std::vector<Vector> step_consensus_iht(const Network& network,
                                       std::span<const LeastSquaresCost> costs,
                                       std::span<const Vector> estimates,
                                       std::span<const double> step_sizes, Index sparsity,
                                       CommCounters* counters) {
  check_inputs(network, costs, estimates, step_sizes, sparsity);
  const int nodes = network.size();
  const Matrix& a = network.combination();
  std::vector<Vector> next;
  next.reserve(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    Vector phi = Vector::Zero(estimates[0].size());
    for (int j = 0; j < nodes; ++j) {
      if (a(j, i) != 0.0) phi += a(j, i) * estimates[static_cast<std::size_t>(j)];
    }
    const auto ii = static_cast<std::size_t>(i);
    next.push_back(step_iht(costs[ii], phi, step_sizes[ii], sparsity));
  }
  if (counters != nullptr) counters->gradient_evaluations += static_cast<std::uint64_t>(nodes);
  charge_full_exchange(
      network, message_length(AlgorithmKind::ConsensusIHT, sparsity, estimates[0].size()),
      counters);
  return next;
}

std::vector<Vector> step_randomized(const Network& network,
                                    std::span<const LeastSquaresCost> costs,
                                    std::span<const Vector> estimates,
                                    std::span<const double> step_sizes, Index sparsity,
                                    const NodeGroup& group, AlgorithmKind kind,
                                    CommCounters* counters) {
  check_inputs(network, costs, estimates, step_sizes, sparsity);
  if (kind != AlgorithmKind::DiFIGHT && kind != AlgorithmKind::MoDiFIGHT &&
      kind != AlgorithmKind::ConsensusIHT) {
    throw InvalidArgument(std::string(to_string(kind)) + " has no randomized variant");
  }
  const int nodes = network.size();
  std::vector<char> in_group(static_cast<std::size_t>(nodes), 0);
  for (int v : group) {
    if (v < 0 || v >= nodes) throw InvalidArgument("group member out of range");
    in_group[static_cast<std::size_t>(v)] = 1;
  }

  std::vector<Vector> next(estimates.begin(), estimates.end());
  const Matrix& a = network.combination();
  const double message = message_length(kind, sparsity, estimates[0].size());

  if (kind == AlgorithmKind::ConsensusIHT) {
    for (int v : group) {
      const auto vi = static_cast<std::size_t>(v);
      Vector phi = Vector::Zero(estimates[0].size());
      for (int u = 0; u < nodes; ++u) {
        if (a(u, v) != 0.0) phi += a(u, v) * estimates[static_cast<std::size_t>(u)];
      }
      next[vi] = step_iht(costs[vi], phi, step_sizes[vi], sparsity);
    }
    if (counters != nullptr) counters->gradient_evaluations += group.size();
  } else {
    const bool inner = kind == AlgorithmKind::MoDiFIGHT;
    std::vector<std::optional<Vector>> psi(static_cast<std::size_t>(nodes));
    for (int v = 0; v < nodes; ++v) {
      bool active = in_group[static_cast<std::size_t>(v)] != 0;
      for (int u : network.neighbors(v)) active = active || in_group[static_cast<std::size_t>(u)];
      if (!active) continue;
      const auto vi = static_cast<std::size_t>(v);
      psi[vi] = intermediate(costs[vi], estimates[vi], step_sizes[vi], sparsity, inner);
      if (counters != nullptr) ++counters->gradient_evaluations;
    }
    for (int v : group) {
      Vector combined = Vector::Zero(estimates[0].size());
      for (int u = 0; u < nodes; ++u) {
        if (a(u, v) != 0.0) combined += a(u, v) * *psi[static_cast<std::size_t>(u)];
      }
      next[static_cast<std::size_t>(v)] = hard_threshold_values(combined, sparsity);
    }
  }

  if (counters != nullptr) {
    const auto unit = as_count(message);
    for (int v : group) {
      counters->received[static_cast<std::size_t>(v)] +=
          static_cast<std::uint64_t>(network.degree(v)) * unit;
      for (int u : network.neighbors(v)) counters->transmitted[static_cast<std::size_t>(u)] += unit;
    }
  }
  return next;
}

Vector step_iht(const LeastSquaresCost& cost, const Vector& estimate, double step_size,
                Index sparsity) {
  return hard_threshold_values(estimate - step_size * cost.gradient(estimate), sparsity);
}

Vector error_norms(std::span<const Vector> estimates, const Vector& x_star) {
  Vector h(static_cast<Index>(estimates.size()));
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    h[static_cast<Index>(i)] = (estimates[i] - x_star).norm();
  }
  return h;
}

double relative_msd(std::span<const Vector> estimates, const Vector& x_star) {
  double total = 0.0;
  for (const auto& x : estimates) total += (x - x_star).squaredNorm();
  const double scale = x_star.squaredNorm();
  total /= static_cast<double>(estimates.size());
  return scale > 0.0 ? total / scale : total;
}

RunTrace run(const AlgorithmSpec& spec, const Network& network,
             std::span<const LeastSquaresCost> costs, const Vector& x_star, std::uint64_t seed) {
  spec.validate(network.size());
  if (costs.size() != static_cast<std::size_t>(network.size())) {
    throw InvalidArgument("need one cost per node");
  }
  const Index n = x_star.size();
  for (const auto& c : costs) {
    if (c.dimension() != n) throw InvalidArgument("cost dimension does not match x*");
  }

  const bool centralized = spec.kind == AlgorithmKind::CentralizedIHT;
  std::vector<LeastSquaresCost> stacked;
  std::span<const LeastSquaresCost> active_costs = costs;
  if (centralized) {
    stacked.push_back(LeastSquaresCost::stacked(costs));
    active_costs = stacked;
  }
  const int nodes = static_cast<int>(active_costs.size());

  RunTrace trace;
  trace.algorithm = spec.kind;
  if (spec.strategy) trace.strategy = spec.strategy->kind();
  trace.seed = seed;

  std::vector<Vector> x(static_cast<std::size_t>(nodes), Vector::Zero(n));
  CommCounters counters(nodes);
  std::mt19937_64 rng(seed);

  const auto record = [&](int iteration) {
    trace.errors.push_back(error_norms(x, x_star));
    trace.msd.push_back(relative_msd(x, x_star));
    trace.transmitted.push_back(counters.transmitted);
    trace.received.push_back(counters.received);
    const bool periodic = spec.snapshot_every > 0 && iteration % spec.snapshot_every == 0;
    if (iteration == 0 || periodic) trace.snapshots.push_back({iteration, x});
  };
  record(0);

  // Randomized runs stop once every node has been updated at least once
  // since the last movement above tolerance.
  std::vector<char> quiet(static_cast<std::size_t>(nodes), 0);
  int quiet_count = 0;

  int iteration = 0;
  while (iteration < spec.max_iterations) {
    std::vector<Vector> next;
    NodeGroup group;
    if (spec.strategy) {
      group = sample_group(*spec.strategy, network, rng);
      next = step_randomized(network, active_costs, x, spec.step_sizes, spec.sparsity, group,
                             spec.kind, &counters);
    } else {
      switch (spec.kind) {
        case AlgorithmKind::DiFIGHT:
          next = step_difight(network, active_costs, x, spec.step_sizes, spec.sparsity, &counters);
          break;
        case AlgorithmKind::MoDiFIGHT:
          next = step_modifight(network, active_costs, x, spec.step_sizes, spec.sparsity,
                                &counters);
          break;
        case AlgorithmKind::ConsensusIHT:
          next = step_consensus_iht(network, active_costs, x, spec.step_sizes, spec.sparsity,
                                    &counters);
          break;
        case AlgorithmKind::NonCooperativeIHT:
        case AlgorithmKind::CentralizedIHT:
          next.reserve(x.size());
          for (std::size_t i = 0; i < x.size(); ++i) {
            next.push_back(step_iht(active_costs[i], x[i], spec.step_sizes[i], spec.sparsity));
          }
          counters.gradient_evaluations += x.size();
          break;
      }
    }
    ++iteration;

    for (const auto& v : next) {
      if (!v.allFinite()) {
        throw DivergenceError("estimate diverged at iteration " + std::to_string(iteration),
                              iteration);
      }
    }
    check_sparse(next, spec.sparsity);

    double movement = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) movement = std::max(movement, (next[i] - x[i]).norm());
    x = std::move(next);
    if (spec.strategy) trace.groups.push_back(group);
    record(iteration);

    if (!spec.early_stop) continue;
    if (!spec.strategy) {
      if (movement <= spec.stop_tolerance) {
        trace.stop_reason = StopReason::Converged;
        break;
      }
      continue;
    }
    if (movement > spec.stop_tolerance) {
      std::fill(quiet.begin(), quiet.end(), 0);
      quiet_count = 0;
    }
    for (int v : group) {
      auto& flag = quiet[static_cast<std::size_t>(v)];
      if (movement <= spec.stop_tolerance && !flag) {
        flag = 1;
        ++quiet_count;
      }
    }
    if (quiet_count == nodes) {
      trace.stop_reason = StopReason::Converged;
      break;
    }
  }

  trace.iterations = iteration;
  trace.gradient_evaluations = counters.gradient_evaluations;
  if (trace.snapshots.back().iteration != iteration) trace.snapshots.push_back({iteration, x});
  trace.final_estimates = std::move(x);
  return trace;
}

}  // namespace difight
