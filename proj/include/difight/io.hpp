#pragma once

#include "difight/analysis.hpp"
#include "difight/harness.hpp"

#include <json.hpp>

#include <string>

namespace difight {

using Json = nlohmann::json;

/// {L, edges: [[i, j], ...] (0-based, i < j), combination: row-major}
Json network_to_json(const Network& network);
/// Rebuilds the network; a missing combination is rebuilt with self loops.
Network network_from_json(const Json& doc);

/// {node, M, N, Phi: row-major, y}
Json cost_to_json(const LeastSquaresCost& cost);
LeastSquaresCost cost_from_json(const Json& doc);

/// {x_star, seed, measurements: [...]}
Json instance_to_json(const Instance& instance);
Instance instance_from_json(const Json& doc);

/// {kind, r, distribution: "uniform" | weights}
Json strategy_to_json(const SelectionStrategy& strategy);
SelectionStrategy strategy_from_json(const Json& doc, int nodes);

/// Field names mirror ExperimentConfig; unknown fields are an error.
Json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const Json& doc);

/// Per-node inputs to the error-recursion bounds:
/// {algorithm, mu: [...], b: [...], omega: [...] or alpha/beta: [...], strategy?}
/// omega, when absent, is |1 - mu(beta+alpha)/2| + mu(beta-alpha)/2.
BoundContext bound_context_from_json(const Json& summary, const Network& network,
                                     bool* randomized = nullptr);

/// {stable, spectral_radius, conditions: {...}, bound: [...] | null}
Json bound_report_to_json(const BoundReport& report);

/// Summary of a run without per-iteration data.
Json trace_summary_to_json(const RunTrace& trace);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& doc);

}  // namespace difight
