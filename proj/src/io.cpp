#include "difight/io.hpp"

#include "difight/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace difight {

namespace {

Json matrix_to_json(const Matrix& m) {
  Json values = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  }
  return values;
}

Matrix matrix_from_json(const Json& values, Index rows, Index cols, const char* name) {
  if (!values.is_array() || static_cast<Index>(values.size()) != rows * cols) {
    throw InvalidArgument(std::string(name) + " must hold " + std::to_string(rows * cols) +
                          " row-major entries");
  }
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = values[static_cast<std::size_t>(r * cols + c)].get<double>();
  }
  return m;
}

Json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const Json& values, const char* name) {
  if (!values.is_array()) throw InvalidArgument(std::string(name) + " must be an array");
  const auto data = values.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Index>(data.size()));
}

Vector node_vector(const Json& doc, const char* name, int nodes) {
  if (!doc.contains(name)) throw InvalidArgument(std::string("cost summary lacks ") + name);
  const Json& field = doc.at(name);
  if (field.is_number()) return Vector::Constant(nodes, field.get<double>());
  Vector v = vector_from_json(field, name);
  if (v.size() != nodes) {
    throw InvalidArgument(std::string(name) + " needs one entry per node");
  }
  return v;
}

AlgorithmKind algorithm_from_json(const Json& value) {
  const auto kind = parse_algorithm(value.get<std::string>());
  if (!kind) throw InvalidArgument("unknown algorithm '" + value.get<std::string>() + "'");
  return *kind;
}

}  // namespace

Json network_to_json(const Network& network) {
  Json edges = Json::array();
  for (int i = 0; i < network.size(); ++i) {
    for (int j : network.neighbors(i)) {
      if (i < j) edges.push_back({i, j});
    }
  }
  return {{"L", network.size()}, {"edges", edges},
          {"combination", matrix_to_json(network.combination())}};
}

Network network_from_json(const Json& doc) {
  const int nodes = doc.at("L").get<int>();
  if (nodes < 1) throw InvalidArgument("network needs L >= 1");
  Adjacency adjacency = Adjacency::Zero(nodes, nodes);
  for (const auto& edge : doc.at("edges")) {
    const int i = edge.at(0).get<int>();
    const int j = edge.at(1).get<int>();
    if (i < 0 || j < 0 || i >= nodes || j >= nodes || i == j) {
      throw InvalidArgument("edge [" + std::to_string(i) + ", " + std::to_string(j) +
                            "] is out of range or a self loop");
    }
    adjacency(i, j) = adjacency(j, i) = 1;
  }
  if (!doc.contains("combination") || doc.at("combination").is_null()) {
    return Network::from_adjacency(std::move(adjacency));
  }
  Matrix combination = matrix_from_json(doc.at("combination"), nodes, nodes, "combination");
  return Network::from_parts(std::move(adjacency), std::move(combination));
}

Json cost_to_json(const LeastSquaresCost& cost) {
  return {{"node", cost.node()},
          {"M", cost.measurements()},
          {"N", cost.dimension()},
          {"Phi", matrix_to_json(cost.phi())},
          {"y", vector_to_json(cost.y())}};
}

LeastSquaresCost cost_from_json(const Json& doc) {
  const Index m = doc.at("M").get<Index>();
  const Index n = doc.at("N").get<Index>();
  if (m < 1 || n < 1) throw InvalidArgument("measurement set needs M, N >= 1");
  Matrix phi = matrix_from_json(doc.at("Phi"), m, n, "Phi");
  Vector y = vector_from_json(doc.at("y"), "y");
  return LeastSquaresCost(std::move(phi), std::move(y), doc.value("node", 0));
}

Json instance_to_json(const Instance& instance) {
  Json measurements = Json::array();
  for (const auto& cost : instance.costs) measurements.push_back(cost_to_json(cost));
  return {{"x_star", vector_to_json(instance.x_star)},
          {"seed", instance.seed},
          {"measurements", measurements}};
}

Instance instance_from_json(const Json& doc) {
  Instance instance;
  instance.x_star = vector_from_json(doc.at("x_star"), "x_star");
  instance.seed = doc.value("seed", std::uint64_t{0});
  for (const auto& m : doc.at("measurements")) instance.costs.push_back(cost_from_json(m));
  for (const auto& cost : instance.costs) {
    if (cost.dimension() != instance.x_star.size()) {
      throw InvalidArgument("measurement dimension does not match x_star");
    }
  }
  return instance;
}

Json strategy_to_json(const SelectionStrategy& strategy) {
  Json doc = {{"kind", std::string(to_string(strategy.kind()))}, {"r", strategy.group_order()}};
  if (strategy.is_uniform()) {
    doc["distribution"] = "uniform";
  } else {
    doc["distribution"] = strategy.weights();
  }
  return doc;
}

SelectionStrategy strategy_from_json(const Json& doc, int nodes) {
  const std::string name = doc.at("kind").get<std::string>();
  const auto kind = parse_strategy(name);
  if (!kind) throw InvalidArgument("unknown strategy '" + name + "'");
  const bool grouped = *kind == StrategyKind::RGP || *kind == StrategyKind::RGNP;
  const int r = doc.value("r", grouped ? 2 : 1);
  const Json distribution = doc.value("distribution", Json("uniform"));
  if (distribution.is_string()) {
    if (distribution.get<std::string>() != "uniform") {
      throw InvalidArgument("distribution must be \"uniform\" or a weight array");
    }
    return SelectionStrategy::uniform(*kind, r);
  }
  auto weights = distribution.get<std::vector<double>>();
  if (grouped) return SelectionStrategy::with_group_weights(*kind, nodes, r, std::move(weights));
  return SelectionStrategy::with_node_weights(*kind, std::move(weights));
}

Json config_to_json(const ExperimentConfig& config) {
  Json algorithms = Json::array();
  for (auto kind : config.algorithms) algorithms.push_back(std::string(to_string(kind)));
  Json doc = {{"N", config.N},
              {"K", config.K},
              {"L", config.L},
              {"M", config.M},
              {"M_is_total", config.M_is_total},
              {"noise", config.noise},
              {"algorithms", algorithms},
              {"instances", config.instances},
              {"n_it", config.n_it},
              {"base_seed", config.base_seed},
              {"success_threshold", config.success_threshold},
              {"curvature_samples", config.curvature_samples},
              {"threads", config.threads}};
  doc["strategy"] = config.strategy ? strategy_to_json(*config.strategy) : Json(nullptr);
  doc["step_size"] = config.step_size ? Json(*config.step_size) : Json(nullptr);
  doc["p"] = config.p ? Json(*config.p) : Json(nullptr);
  return doc;
}

ExperimentConfig config_from_json(const Json& doc) {
  static const std::set<std::string> known = {
      "N",         "K",    "L",         "M",         "M_is_total",        "noise",
      "algorithms", "strategy", "instances", "n_it", "base_seed", "success_threshold",
      "step_size", "p",    "curvature_samples", "threads"};
  if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw InvalidArgument("unknown config field '" + key + "'");
  }
  ExperimentConfig config;
  config.N = doc.value("N", config.N);
  config.K = doc.value("K", config.K);
  config.L = doc.value("L", config.L);
  if (doc.contains("M")) {
    config.M = doc.at("M").is_array() ? doc.at("M").get<std::vector<Index>>()
                                      : std::vector<Index>{doc.at("M").get<Index>()};
  }
  config.M_is_total = doc.value("M_is_total", config.M_is_total);
  config.noise = doc.value("noise", config.noise);
  if (doc.contains("algorithms")) {
    config.algorithms.clear();
    for (const auto& a : doc.at("algorithms")) config.algorithms.push_back(algorithm_from_json(a));
  }
  if (doc.contains("strategy") && !doc.at("strategy").is_null()) {
    config.strategy = strategy_from_json(doc.at("strategy"), config.L);
  }
  config.instances = doc.value("instances", config.instances);
  config.n_it = doc.value("n_it", config.n_it);
  config.base_seed = doc.value("base_seed", config.base_seed);
  config.success_threshold = doc.value("success_threshold", config.success_threshold);
  if (doc.contains("step_size") && !doc.at("step_size").is_null()) {
    config.step_size = doc.at("step_size").get<double>();
  }
  if (doc.contains("p") && !doc.at("p").is_null()) config.p = doc.at("p").get<double>();
  config.curvature_samples = doc.value("curvature_samples", config.curvature_samples);
  config.threads = doc.value("threads", config.threads);
  config.validate();
  return config;
}

BoundContext bound_context_from_json(const Json& summary, const Network& network,
                                     bool* randomized) {
  const int nodes = network.size();
  BoundContext context;
  const AlgorithmKind kind = algorithm_from_json(summary.value("algorithm", Json("DiFIGHT")));
  context.gain = recursion_gain(kind);
  context.combination = network.combination();
  context.step_sizes = node_vector(summary, "mu", nodes);
  context.gradient_at_target = node_vector(summary, "b", nodes);
  if (summary.contains("omega")) {
    context.omega = node_vector(summary, "omega", nodes);
  } else {
    const Vector alpha = node_vector(summary, "alpha", nodes);
    const Vector beta = node_vector(summary, "beta", nodes);
    context.omega.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
      CurvatureBounds bounds;
      bounds.alpha = alpha[i];
      bounds.beta = beta[i];
      context.omega[i] = contraction_factor(bounds, context.step_sizes[i]).omega;
    }
  }
  const bool has_strategy = summary.contains("strategy") && !summary.at("strategy").is_null();
  if (has_strategy) {
    const auto strategy = strategy_from_json(summary.at("strategy"), nodes);
    const auto pi = participation_probabilities(strategy, network);
    context.participation = Eigen::Map<const Vector>(pi.data(), nodes);
  }
  if (randomized) *randomized = has_strategy;
  context.validate();
  return context;
}

Json bound_report_to_json(const BoundReport& report) {
  Json doc;
  doc["stable"] = report.stable;
  doc["spectral_radius"] = report.spectral_radius;
  doc["conditions"] = {{"weighted_max", report.conditions.weighted_max},
                       {"weighted_holds", report.conditions.weighted_holds()},
                       {"omega_max", report.conditions.omega_max},
                       {"omega_holds", report.conditions.omega_holds()},
                       {"threshold", report.conditions.threshold}};
  doc["bound"] = report.limit_bound ? vector_to_json(*report.limit_bound) : Json(nullptr);
  return doc;
}

Json trace_summary_to_json(const RunTrace& trace) {
  Json doc = {{"algorithm", std::string(to_string(trace.algorithm))},
              {"strategy", trace.strategy ? Json(std::string(to_string(*trace.strategy)))
                                          : Json(nullptr)},
              {"seed", trace.seed},
              {"iterations", trace.iterations},
              {"stop_reason", std::string(to_string(trace.stop_reason))},
              {"final_msd", trace.msd.back()},
              {"final_errors", vector_to_json(trace.errors.back())},
              {"total_transmitted", trace.total_transmitted()},
              {"total_received", trace.total_received()},
              {"gradient_evaluations", trace.gradient_evaluations}};
  return doc;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace difight
