// Command-line front end: network generation, single runs, sweeps, MSD
// studies, bound analysis and communication tables.

#include "difight/analysis.hpp"
#include "difight/errors.hpp"
#include "difight/harness.hpp"
#include "difight/io.hpp"

#include <CLI11.hpp>

#include <clocale>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <utility>

using namespace difight;

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  return out;
}

Network load_or_generate(const std::string& net_path, const ExperimentConfig& config) {
  if (net_path.empty()) return experiment_network(config);
  Network network = network_from_json(read_json_file(net_path));
  if (network.size() != config.L) {
    throw InvalidArgument("network has " + std::to_string(network.size()) +
                          " nodes but config asks for L = " + std::to_string(config.L));
  }
  return network;
}

int cmd_generate_network(int nodes, double p, std::uint64_t seed, bool no_self_loops,
                         const std::string& out) {
  NetworkOptions options;
  options.self_loops = !no_self_loops;
  if (p < 0.0) p = default_edge_probability(nodes);
  const Network network = generate_connected_network(nodes, p, seed, options);
  write_json_file(out, network_to_json(network));
  std::cerr << "network with " << nodes << " nodes after " << network.retries() << " retries\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& net_path, const std::string& out,
            const std::string& algo, int instance_index, const std::string& measurements_path,
            const std::string& instance_out, const std::string& summary_path) {
  const ExperimentConfig config = config_from_json(read_json_file(config_path));
  const Network network = load_or_generate(net_path, config);

  AlgorithmKind kind = config.algorithms.front();
  if (!algo.empty()) {
    const auto parsed = parse_algorithm(algo);
    if (!parsed) throw InvalidArgument("unknown algorithm '" + algo + "'");
    kind = *parsed;
  }

  Instance instance = measurements_path.empty()
                          ? study_instance(config, config.per_node(config.M.front()), instance_index)
                          : instance_from_json(read_json_file(measurements_path));
  if (static_cast<int>(instance.costs.size()) != network.size()) {
    throw InvalidArgument("instance has a different node count than the network");
  }
  if (!instance_out.empty()) write_json_file(instance_out, instance_to_json(instance));
  const RunTrace trace =
      run_instance(config, network, prepare_instance(config, std::move(instance)), kind);

  auto csv = open_output(out);
  write_trace_csv(csv, trace);
  if (!summary_path.empty()) write_json_file(summary_path, trace_summary_to_json(trace));
  std::cerr << to_string(kind) << ": " << trace.iterations << " iterations, final MSD "
            << trace.msd.back() << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& net_path, const std::string& out,
              int threads) {
  ExperimentConfig config = config_from_json(read_json_file(config_path));
  if (threads > 0) config.threads = threads;
  const Network network = load_or_generate(net_path, config);
  const auto rows = recovery_sweep(config, network);
  auto csv = open_output(out);
  write_recovery_csv(csv, rows);
  return 0;
}

int cmd_msd(const std::string& config_path, const std::string& net_path, const std::string& out,
            int threads) {
  ExperimentConfig config = config_from_json(read_json_file(config_path));
  if (threads > 0) config.threads = threads;
  const Network network = load_or_generate(net_path, config);
  const auto curves = msd_study(config, network);
  auto csv = open_output(out);
  write_msd_csv(csv, curves);
  return 0;
}

int cmd_analyze_bounds(const std::string& net_path, const std::string& summary_path,
                       const std::string& out) {
  const Network network = network_from_json(read_json_file(net_path));
  bool randomized = false;
  const BoundContext context =
      bound_context_from_json(read_json_file(summary_path), network, &randomized);
  const BoundReport report =
      randomized ? randomized_bound(context) : deterministic_bound(context);
  Json doc = bound_report_to_json(report);
  doc["model"] = randomized ? "randomized" : "deterministic";
  write_json_file(out, doc);
  return 0;
}

int cmd_comms(const std::string& strategy_name, int r, const std::string& net_path, Index K,
              Index N, const std::string& algo, int steps, std::uint64_t seed) {
  const Network network = network_from_json(read_json_file(net_path));
  const auto algorithm = parse_algorithm(algo);
  if (!algorithm) throw InvalidArgument("unknown algorithm '" + algo + "'");
  std::optional<SelectionStrategy> strategy;
  if (strategy_name != "none") {
    const auto kind = parse_strategy(strategy_name);
    if (!kind) throw InvalidArgument("unknown strategy '" + strategy_name + "'");
    strategy = SelectionStrategy::uniform(*kind, r);
    strategy->validate_for(network.size());
  }
  const ParticipationProfile profile = expected_comms(strategy, network, *algorithm, K, N);

  // Simulated averages replay only the selection and counting logic.
  const int nodes = network.size();
  std::vector<double> hits(static_cast<std::size_t>(nodes), 0.0);
  std::vector<double> sent(hits), got(hits);
  if (strategy) {
    std::mt19937_64 rng(seed);
    for (int n = 0; n < steps; ++n) {
      for (int v : sample_group(*strategy, network, rng)) {
        hits[static_cast<std::size_t>(v)] += 1;
        got[static_cast<std::size_t>(v)] += network.degree(v) * profile.message_length;
        for (int u : network.neighbors(v)) sent[static_cast<std::size_t>(u)] += profile.message_length;
      }
    }
  }

  std::printf("strategy=%s r=%d algo=%s L_algo=%g steps=%d\n", strategy_name.c_str(), r,
              std::string(to_string(*algorithm)).c_str(), profile.message_length, steps);
  std::printf("%4s %4s %10s %10s %12s %12s %12s %12s\n", "v", "d_v", "pi", "pi_sim", "T/step",
              "T_sim", "R/step", "R_sim");
  for (int v = 0; v < nodes; ++v) {
    const auto i = static_cast<std::size_t>(v);
    const double scale = strategy ? 1.0 / steps : 0.0;
    const double pi_sim = strategy ? hits[i] * scale : 1.0;
    const double t_sim = strategy ? sent[i] * scale : profile.transmit[i];
    const double r_sim = strategy ? got[i] * scale : profile.receive[i];
    std::printf("%4d %4d %10.6f %10.6f %12.4f %12.4f %12.4f %12.4f\n", v, network.degree(v),
                profile.pi[i], pi_sim, profile.transmit[i], t_sim, profile.receive[i], r_sim);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{"Distributed iterative hard thresholding simulator"};
  app.require_subcommand(1);

  int nodes = 10;
  double p = -1.0;
  std::uint64_t seed = 1;
  bool no_self_loops = false;
  std::string out, config_path, net_path, algo, measurements, instance_out, summary;
  std::string cost_summary, strategy_name = "rgnp", comms_algo = "difight";
  int instance_index = 0, threads = 0, r = 2, steps = 100000;
  Index K = 10, N = 200;

  auto* gen = app.add_subcommand("generate-network", "Sample a connected Erdos-Renyi network");
  gen->add_option("--L", nodes, "Number of nodes")->required();
  gen->add_option("--p", p, "Edge probability (default ln L / L)");
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_flag("--no-self-loops", no_self_loops, "Normalize the bare adjacency");
  gen->add_option("--out", out, "Output JSON")->required();

  auto* run_cmd = app.add_subcommand("run", "Run one instance and write its trace CSV");
  run_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
  run_cmd->add_option("--net", net_path, "Network JSON (default: generated from the config)");
  run_cmd->add_option("--out", out, "Trace CSV")->required();
  run_cmd->add_option("--algo", algo, "Algorithm (default: first in the config)");
  run_cmd->add_option("--instance", instance_index, "Instance index for seeding");
  run_cmd->add_option("--measurements", measurements, "Replay an instance JSON");
  run_cmd->add_option("--save-instance", instance_out, "Write the instance JSON");
  run_cmd->add_option("--summary", summary, "Write a JSON run summary");

  auto* sweep = app.add_subcommand("sweep", "Recovery probability sweep over M");
  sweep->add_option("--config", config_path, "Experiment config JSON")->required();
  sweep->add_option("--net", net_path, "Network JSON (default: generated from the config)");
  sweep->add_option("--out", out, "Results CSV")->required();
  sweep->add_option("--threads", threads, "Worker threads (overrides the config)");

  auto* msd = app.add_subcommand("msd", "Per-iteration MSD curves");
  msd->add_option("--config", config_path, "Experiment config JSON")->required();
  msd->add_option("--net", net_path, "Network JSON (default: generated from the config)");
  msd->add_option("--out", out, "MSD CSV")->required();
  msd->add_option("--threads", threads, "Worker threads (overrides the config)");

  auto* bounds = app.add_subcommand("analyze-bounds", "Stability and limit bounds");
  bounds->add_option("--net", net_path, "Network JSON")->required();
  bounds->add_option("--cost-summary", cost_summary, "Per-node mu, b, omega or alpha/beta")
      ->required();
  bounds->add_option("--out", out, "Report JSON")->required();

  auto* comms = app.add_subcommand("comms", "Analytic vs simulated communication per node");
  comms->add_option("--strategy", strategy_name, "rp, rnp, rgp, rgnp or none");
  comms->add_option("--r", r, "Group order for rgp/rgnp");
  comms->add_option("--net", net_path, "Network JSON")->required();
  comms->add_option("--K", K, "Sparsity");
  comms->add_option("--N", N, "Signal dimension");
  comms->add_option("--algo", comms_algo, "difight, modifight or consensus");
  comms->add_option("--steps", steps, "Simulated steps");
  comms->add_option("--seed", seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate_network(nodes, p, seed, no_self_loops, out);
    if (*run_cmd) {
      return cmd_run(config_path, net_path, out, algo, instance_index, measurements, instance_out,
                     summary);
    }
    if (*sweep) return cmd_sweep(config_path, net_path, out, threads);
    if (*msd) return cmd_msd(config_path, net_path, out, threads);
    if (*bounds) return cmd_analyze_bounds(net_path, cost_summary, out);
    if (*comms) return cmd_comms(strategy_name, r, net_path, K, N, comms_algo, steps, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
