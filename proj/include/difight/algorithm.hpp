#pragma once

#include "difight/signals.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace difight {

enum class AlgorithmKind { DiFIGHT, MoDiFIGHT, ConsensusIHT, NonCooperativeIHT, CentralizedIHT };

std::string_view to_string(AlgorithmKind kind);
/// Accepts the canonical names case-insensitively plus short aliases
/// ("difight", "modifight", "consensus", "noncooperative", "centralized").
std::optional<AlgorithmKind> parse_algorithm(std::string_view name);

/// Scalar values carried by one neighbour message: support indices and
/// values of a K-sparse estimate (2K), plus the dense gradient (N) when
/// gradients are diffused. Zero for algorithms that never communicate.
double message_length(AlgorithmKind kind, Index sparsity, Index dimension);

/// Error-recursion gain: 2 when only the combined iterate is thresholded,
/// 4 when intermediates are thresholded before exchange as well.
double recursion_gain(AlgorithmKind kind);

}  // namespace difight
