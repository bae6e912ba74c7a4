#pragma once

#include "difight/engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace difight {

/// One Monte Carlo study. JSON field names match the member names.
struct ExperimentConfig {
  Index N = 200;
  Index K = 10;
  int L = 10;
  std::vector<Index> M{30};  // sweep points
  bool M_is_total = false;   // M lists network-wide totals instead of per-node counts
  double noise = 0.0;        // std-dev of additive Gaussian measurement noise
  std::vector<AlgorithmKind> algorithms{AlgorithmKind::DiFIGHT};
  std::optional<SelectionStrategy> strategy;
  int instances = 100;
  int n_it = 500;
  std::uint64_t base_seed = 1;
  double success_threshold = 1e-4;
  std::optional<double> step_size;  // absent: 2/(alpha+beta) per node at order 3K
  std::optional<double> p;          // edge probability; absent: ln L / L
  int curvature_samples = 500;
  int threads = 0;  // 0 uses the hardware concurrency

  void validate() const;
  Index per_node(Index m) const;
  Index total(Index m) const;
};

/// Deterministic seed for stream `stream` of item `index` under `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream = 0);

struct Instance {
  Vector x_star;
  std::vector<LeastSquaresCost> costs;
  std::uint64_t seed = 0;
};

/// Uniform K-subset support with N(0, 1) values; Phi_v entries N(0, 1/M);
/// y_v = Phi_v x* + e_v with e_v ~ N(0, noise^2 I).
Instance generate_instance(const ExperimentConfig& config, Index m_per_node, std::uint64_t seed);

/// mu_i = 2 / (alpha + beta) from sampled curvature of order min(3K, N).
std::vector<double> default_step_sizes(std::span<const LeastSquaresCost> costs, Index sparsity,
                                       std::uint64_t seed, int samples = 500);

enum class SuccessMode { Centralized, Distributed };

/// Centralized: ||x - x*||^2 / ||x*||^2 < threshold for the single estimate.
/// Distributed: sum_j ||x_j - x*||^2 / (L ||x*||^2) < threshold.
/// Throws InvalidArgument when x* = 0.
bool success(std::span<const Vector> estimates, const Vector& x_star, SuccessMode mode,
             double threshold = 1e-4);

/// First n with relative MSD below `threshold`; -1 if never reached.
int iterations_to_threshold(const RunTrace& trace, double threshold);

/// An instance with the step sizes every algorithm of a study shares.
struct PreparedInstance {
  Instance instance;
  std::vector<double> node_steps;
  double centralized_step = 0.0;  // for the stacked cost
};

/// Instance `index` of a study at `m_per_node` measurements, seeded from the
/// config's base seed.
Instance study_instance(const ExperimentConfig& config, Index m_per_node, int index);

/// Attaches the config's fixed step size, or 2/(alpha+beta) from sampled curvature.
PreparedInstance prepare_instance(const ExperimentConfig& config, Instance instance);

/// Runs one algorithm on a prepared instance; the run seed derives from the
/// instance seed so every algorithm sees the same selection stream.
RunTrace run_instance(const ExperimentConfig& config, const Network& network,
                      const PreparedInstance& prepared, AlgorithmKind kind);

/// The network held fixed across every instance of a study.
Network experiment_network(const ExperimentConfig& config);

/// Spec for one algorithm of a study, given per-node step sizes (the
/// centralized entry is used for CentralizedIHT).
AlgorithmSpec make_spec(const ExperimentConfig& config, AlgorithmKind kind,
                        const std::vector<double>& node_steps, double centralized_step);

struct RecoveryResult {
  AlgorithmKind algorithm = AlgorithmKind::DiFIGHT;
  std::optional<StrategyKind> strategy;
  int group_order = 1;
  Index m_per_node = 0;
  Index m_total = 0;
  int instances = 0;
  int failures = 0;  // diverged runs, counted unsuccessful
  double p_success = 0.0;
  double mean_iters = 0.0;  // iterations to threshold; unreached runs count their full length
  double mean_transmitted = 0.0;
  double mean_received = 0.0;
  double mean_msd = 0.0;
  double median_msd = 0.0;
};

std::vector<RecoveryResult> recovery_sweep(const ExperimentConfig& config, const Network& network);

struct MsdCurve {
  AlgorithmKind algorithm = AlgorithmKind::DiFIGHT;
  std::optional<StrategyKind> strategy;
  int group_order = 1;
  Index m_per_node = 0;
  std::vector<double> msd;  // averaged over instances, n = 0..n_it
  std::vector<int> iterations_to_threshold;  // per instance; -1 when unreached
};

/// Per-iteration relative MSD for every algorithm at every sweep point.
std::vector<MsdCurve> msd_study(const ExperimentConfig& config, const Network& network);

/// algo,strategy,M_per_node,M_total,p_success,mean_iters,mean_T_total,mean_R_total
void write_recovery_csv(std::ostream& out, std::span<const RecoveryResult> rows);
/// algo,strategy,M_per_node,n,msd
void write_msd_csv(std::ostream& out, std::span<const MsdCurve> curves);
/// n,h_1..h_L,MSD,T,R
void write_trace_csv(std::ostream& out, const RunTrace& trace);

std::string strategy_label(const std::optional<StrategyKind>& kind, int group_order);

}  // namespace difight
