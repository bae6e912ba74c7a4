#include "difight/harness.hpp"

#include "difight/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <functional>
#include <iostream>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace difight {

namespace {

constexpr std::uint64_t kNetworkStream = 1;
constexpr std::uint64_t kRunStream = 2;
constexpr std::uint64_t kStepStream = 3;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string format_number(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return ec == std::errc() ? std::string(buffer, end) : std::string("nan");
}

int worker_count(const ExperimentConfig& config, int jobs) {
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(threads, 1, std::max(jobs, 1));
}

// Runs job(i) for i in [0, jobs) on a small pool. Each job writes only its own
// slot, so results do not depend on scheduling.
void parallel_for(int jobs, int workers, const std::function<void(int)>& job) {
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto drain = [&] {
    for (int i = next++; i < jobs; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

struct RunOutcome {
  bool diverged = false;
  bool succeeded = false;
  int iterations_to_threshold = -1;
  int iterations = 0;
  double final_msd = 0.0;
  double transmitted = 0.0;
  double received = 0.0;
  std::vector<double> msd;
};

RunOutcome execute(const ExperimentConfig& config, const Network& network,
                   const PreparedInstance& prepared, AlgorithmKind kind, bool keep_curve) {
  RunOutcome outcome;
  try {
    const RunTrace trace = run_instance(config, network, prepared, kind);
    const auto mode = kind == AlgorithmKind::CentralizedIHT ? SuccessMode::Centralized
                                                            : SuccessMode::Distributed;
    outcome.succeeded =
        success(trace.final_estimates, prepared.instance.x_star, mode, config.success_threshold);
    outcome.iterations_to_threshold = iterations_to_threshold(trace, config.success_threshold);
    outcome.iterations = trace.iterations;
    outcome.final_msd = trace.msd.back();
    outcome.transmitted = static_cast<double>(trace.total_transmitted());
    outcome.received = static_cast<double>(trace.total_received());
    if (keep_curve) outcome.msd = trace.msd;
  } catch (const DivergenceError& e) {
    std::cerr << "instance seed " << prepared.instance.seed << ", " << to_string(kind) << ": "
              << e.what() << "\n";
    outcome.diverged = true;
    outcome.iterations = e.iteration();
    outcome.final_msd = std::numeric_limits<double>::infinity();
  }
  return outcome;
}

bool uses_strategy(const ExperimentConfig& config, AlgorithmKind kind) {
  return config.strategy && kind != AlgorithmKind::NonCooperativeIHT &&
         kind != AlgorithmKind::CentralizedIHT;
}

// outcomes[algorithm][instance] for one sweep point.
std::vector<std::vector<RunOutcome>> run_point(const ExperimentConfig& config,
                                               const Network& network, Index m_per_node,
                                               bool keep_curves) {
  const auto algorithms = config.algorithms.size();
  std::vector<std::vector<RunOutcome>> outcomes(
      algorithms, std::vector<RunOutcome>(static_cast<std::size_t>(config.instances)));
  parallel_for(config.instances, worker_count(config, config.instances), [&](int index) {
    const PreparedInstance prepared =
        prepare_instance(config, study_instance(config, m_per_node, index));
    for (std::size_t a = 0; a < algorithms; ++a) {
      outcomes[a][static_cast<std::size_t>(index)] =
          execute(config, network, prepared, config.algorithms[a], keep_curves);
    }
  });
  return outcomes;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (N < 1 || K < 0 || K > N) throw InvalidArgument("config needs 0 <= K <= N and N >= 1");
  if (L < 1) throw InvalidArgument("config needs at least one node");
  if (M.empty()) throw InvalidArgument("config needs at least one measurement count");
  for (Index m : M) {
    if (per_node(m) < 1) throw InvalidArgument("every node needs at least one measurement");
  }
  if (noise < 0.0) throw InvalidArgument("noise level must be nonnegative");
  if (algorithms.empty()) throw InvalidArgument("config lists no algorithms");
  if (instances < 1) throw InvalidArgument("config needs at least one instance");
  if (n_it < 0) throw InvalidArgument("n_it must be nonnegative");
  if (!(success_threshold > 0.0)) throw InvalidArgument("success threshold must be positive");
  if (step_size && !(*step_size > 0.0)) throw InvalidArgument("step size must be positive");
  if (p && !(*p >= 0.0 && *p <= 1.0)) throw InvalidArgument("edge probability outside [0, 1]");
  if (curvature_samples < 1) throw InvalidArgument("curvature_samples must be positive");
  if (strategy) strategy->validate_for(L);
}

Index ExperimentConfig::per_node(Index m) const { return M_is_total ? m / L : m; }
Index ExperimentConfig::total(Index m) const { return M_is_total ? m : m * L; }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(base) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

Instance generate_instance(const ExperimentConfig& config, Index m_per_node, std::uint64_t seed) {
  if (m_per_node < 1) throw InvalidArgument("need at least one measurement per node");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> standard(0.0, 1.0);

  Instance instance;
  instance.seed = seed;
  instance.x_star = Vector::Zero(config.N);
  std::vector<Index> pool(static_cast<std::size_t>(config.N));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < config.K; ++i) {
    std::uniform_int_distribution<Index> pick(i, config.N - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  for (Index i = 0; i < config.K; ++i) instance.x_star[pool[static_cast<std::size_t>(i)]] = standard(rng);

  const double entry_scale = 1.0 / std::sqrt(static_cast<double>(m_per_node));
  instance.costs.reserve(static_cast<std::size_t>(config.L));
  for (int v = 0; v < config.L; ++v) {
    Matrix phi(m_per_node, config.N);
    for (Index c = 0; c < config.N; ++c) {
      for (Index r = 0; r < m_per_node; ++r) phi(r, c) = entry_scale * standard(rng);
    }
    Vector y = phi * instance.x_star;
    if (config.noise > 0.0) {
      for (Index r = 0; r < m_per_node; ++r) y[r] += config.noise * standard(rng);
    }
    instance.costs.emplace_back(std::move(phi), std::move(y), v);
  }
  return instance;
}

std::vector<double> default_step_sizes(std::span<const LeastSquaresCost> costs, Index sparsity,
                                       std::uint64_t seed, int samples) {
  std::vector<double> steps;
  steps.reserve(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const Index order = std::clamp<Index>(3 * sparsity, 1, costs[i].dimension());
    CurvatureOptions options;
    options.mode = CurvatureMode::Sampled;
    options.samples = samples;
    options.seed = derive_seed(seed, i);
    steps.push_back(optimal_step_size(restricted_curvature(costs[i], order, options)));
  }
  return steps;
}

bool success(std::span<const Vector> estimates, const Vector& x_star, SuccessMode mode,
             double threshold) {
  const double scale = x_star.squaredNorm();
  if (scale == 0.0) throw InvalidArgument("success is undefined for x* = 0");
  if (estimates.empty()) throw InvalidArgument("no estimates to score");
  if (mode == SuccessMode::Centralized) {
    return (estimates.front() - x_star).squaredNorm() / scale < threshold;
  }
  double total = 0.0;
  for (const auto& x : estimates) total += (x - x_star).squaredNorm();
  return total / (static_cast<double>(estimates.size()) * scale) < threshold;
}

int iterations_to_threshold(const RunTrace& trace, double threshold) {
  for (std::size_t n = 0; n < trace.msd.size(); ++n) {
    if (trace.msd[n] < threshold) return static_cast<int>(n);
  }
  return -1;
}

Instance study_instance(const ExperimentConfig& config, Index m_per_node, int index) {
  return generate_instance(config, m_per_node,
                           derive_seed(config.base_seed, static_cast<std::uint64_t>(index)));
}

PreparedInstance prepare_instance(const ExperimentConfig& config, Instance instance) {
  PreparedInstance prepared;
  prepared.instance = std::move(instance);
  const auto& costs = prepared.instance.costs;
  if (config.step_size) {
    prepared.node_steps.assign(costs.size(), *config.step_size);
    prepared.centralized_step = *config.step_size;
    return prepared;
  }
  const std::uint64_t step_seed = derive_seed(prepared.instance.seed, 0, kStepStream);
  prepared.node_steps = default_step_sizes(costs, config.K, step_seed, config.curvature_samples);
  const LeastSquaresCost stacked = LeastSquaresCost::stacked(costs);
  prepared.centralized_step =
      default_step_sizes(std::span(&stacked, 1), config.K, step_seed, config.curvature_samples)
          .front();
  return prepared;
}

RunTrace run_instance(const ExperimentConfig& config, const Network& network,
                      const PreparedInstance& prepared, AlgorithmKind kind) {
  const AlgorithmSpec spec =
      make_spec(config, kind, prepared.node_steps, prepared.centralized_step);
  return run(spec, network, prepared.instance.costs, prepared.instance.x_star,
             derive_seed(prepared.instance.seed, 0, kRunStream));
}

Network experiment_network(const ExperimentConfig& config) {
  const double p = config.p ? *config.p : default_edge_probability(config.L);
  return generate_connected_network(config.L, p, derive_seed(config.base_seed, 0, kNetworkStream));
}

AlgorithmSpec make_spec(const ExperimentConfig& config, AlgorithmKind kind,
                        const std::vector<double>& node_steps, double centralized_step) {
  AlgorithmSpec spec;
  spec.kind = kind;
  spec.sparsity = config.K;
  spec.max_iterations = config.n_it;
  spec.step_sizes = kind == AlgorithmKind::CentralizedIHT ? std::vector<double>{centralized_step}
                                                          : node_steps;
  if (uses_strategy(config, kind)) spec.strategy = config.strategy;
  return spec;
}

std::vector<RecoveryResult> recovery_sweep(const ExperimentConfig& config, const Network& network) {
  config.validate();
  std::vector<RecoveryResult> rows;
  for (Index m : config.M) {
    const Index per_node = config.per_node(m);
    const auto outcomes = run_point(config, network, per_node, false);
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
      const AlgorithmKind kind = config.algorithms[a];
      RecoveryResult row;
      row.algorithm = kind;
      if (uses_strategy(config, kind)) {
        row.strategy = config.strategy->kind();
        row.group_order = config.strategy->group_order();
      }
      row.m_per_node = per_node;
      row.m_total = kind == AlgorithmKind::CentralizedIHT || !config.M_is_total
                        ? per_node * config.L
                        : m;
      row.instances = config.instances;
      std::vector<double> msds;
      int successes = 0;
      for (const auto& o : outcomes[a]) {
        successes += o.succeeded ? 1 : 0;
        row.failures += o.diverged ? 1 : 0;
        row.mean_iters += o.iterations_to_threshold >= 0 ? o.iterations_to_threshold : o.iterations;
        row.mean_transmitted += o.transmitted;
        row.mean_received += o.received;
        row.mean_msd += o.final_msd;
        msds.push_back(o.final_msd);
      }
      const double count = static_cast<double>(config.instances);
      row.p_success = successes / count;
      row.mean_iters /= count;
      row.mean_transmitted /= count;
      row.mean_received /= count;
      row.mean_msd /= count;
      row.median_msd = median(std::move(msds));
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<MsdCurve> msd_study(const ExperimentConfig& config, const Network& network) {
  config.validate();
  std::vector<MsdCurve> curves;
  const auto length = static_cast<std::size_t>(config.n_it) + 1;
  for (Index m : config.M) {
    const Index per_node = config.per_node(m);
    const auto outcomes = run_point(config, network, per_node, true);
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
      MsdCurve curve;
      curve.algorithm = config.algorithms[a];
      if (uses_strategy(config, curve.algorithm)) {
        curve.strategy = config.strategy->kind();
        curve.group_order = config.strategy->group_order();
      }
      curve.m_per_node = per_node;
      curve.msd.assign(length, 0.0);
      for (const auto& o : outcomes[a]) {
        curve.iterations_to_threshold.push_back(o.iterations_to_threshold);
        for (std::size_t n = 0; n < length; ++n) {
          // Early-stopped runs sit at a fixed point; diverged runs count as 1.
          const double value = o.msd.empty() ? 1.0 : o.msd[std::min(n, o.msd.size() - 1)];
          curve.msd[n] += value;
        }
      }
      for (double& v : curve.msd) v /= static_cast<double>(config.instances);
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

std::string strategy_label(const std::optional<StrategyKind>& kind, int group_order) {
  if (!kind) return "none";
  std::string label(to_string(*kind));
  if (*kind == StrategyKind::RGP || *kind == StrategyKind::RGNP) {
    label += "_" + std::to_string(group_order);
  }
  return label;
}

void write_recovery_csv(std::ostream& out, std::span<const RecoveryResult> rows) {
  out << "algo,strategy,M_per_node,M_total,p_success,mean_iters,mean_T_total,mean_R_total\n";
  for (const auto& r : rows) {
    out << to_string(r.algorithm) << ',' << strategy_label(r.strategy, r.group_order) << ','
        << r.m_per_node << ',' << r.m_total << ',' << format_number(r.p_success) << ','
        << format_number(r.mean_iters) << ',' << format_number(r.mean_transmitted) << ','
        << format_number(r.mean_received) << '\n';
  }
}

void write_msd_csv(std::ostream& out, std::span<const MsdCurve> curves) {
  out << "algo,strategy,M_per_node,n,msd\n";
  for (const auto& c : curves) {
    const std::string label = strategy_label(c.strategy, c.group_order);
    for (std::size_t n = 0; n < c.msd.size(); ++n) {
      out << to_string(c.algorithm) << ',' << label << ',' << c.m_per_node << ',' << n << ','
          << format_number(c.msd[n]) << '\n';
    }
  }
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  const int nodes = trace.nodes();
  out << "n";
  for (int i = 1; i <= nodes; ++i) out << ",h_" << i;
  out << ",MSD,T,R\n";
  for (std::size_t n = 0; n < trace.errors.size(); ++n) {
    out << n;
    for (Index i = 0; i < nodes; ++i) out << ',' << format_number(trace.errors[n][i]);
    const auto t = std::accumulate(trace.transmitted[n].begin(), trace.transmitted[n].end(),
                                   std::uint64_t{0});
    const auto r =
        std::accumulate(trace.received[n].begin(), trace.received[n].end(), std::uint64_t{0});
    out << ',' << format_number(trace.msd[n]) << ',' << t << ',' << r << '\n';
  }
}

}  // namespace difight
