#include "difight/signals.hpp"

#include "difight/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace difight {

namespace {

void check_order(Index k, Index n) {
  if (k < 0 || k > n) {
    throw InvalidArgument("sparsity order " + std::to_string(k) +
                          " outside [0, " + std::to_string(n) + "]");
  }
}

// Indices of the k largest magnitudes, ties broken toward the lower index,
// returned in ascending index order.
std::vector<Index> top_k_indices(const Vector& x, Index k) {
  check_order(k, x.size());
  std::vector<Index> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), Index{0});
  const auto by_magnitude = [&x](Index a, Index b) {
    const double ma = std::abs(x[a]);
    const double mb = std::abs(x[b]);
    return ma > mb || (ma == mb && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), by_magnitude);
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

SupportSet::SupportSet(std::vector<Index> indices, Index dimension)
    : indices_(std::move(indices)), dimension_(dimension) {
  if (dimension_ < 0) throw InvalidArgument("negative support dimension");
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw InvalidArgument("duplicate index in support set");
  }
  if (!indices_.empty() && (indices_.front() < 0 || indices_.back() >= dimension_)) {
    throw InvalidArgument("support index out of range for dimension " +
                          std::to_string(dimension_));
  }
}

SupportSet SupportSet::of(const Vector& x) {
  std::vector<Index> nz;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) nz.push_back(i);
  }
  return SupportSet(std::move(nz), x.size());
}

bool SupportSet::contains(Index i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

SupportSet SupportSet::united(const SupportSet& other) const {
  if (other.dimension_ != dimension_) {
    throw InvalidArgument("support sets over different dimensions");
  }
  std::vector<Index> merged;
  merged.reserve(indices_.size() + other.indices_.size());
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(),
                 other.indices_.end(), std::back_inserter(merged));
  SupportSet out;
  out.indices_ = std::move(merged);
  out.dimension_ = dimension_;
  return out;
}

SparseSignal::SparseSignal(Vector values, Index sparsity)
    : values_(std::move(values)), support_(SupportSet::of(values_)), sparsity_(sparsity) {
  if (support_.size() > sparsity_) {
    throw InvalidArgument("signal has " + std::to_string(support_.size()) +
                          " nonzeros, budget is " + std::to_string(sparsity_));
  }
}

SparseSignal hard_threshold(const Vector& x, Index k) {
  return SparseSignal(hard_threshold_values(x, k), k);
}

Vector hard_threshold_values(const Vector& x, Index k) {
  Vector out = Vector::Zero(x.size());
  for (Index i : top_k_indices(x, k)) out[i] = x[i];
  return out;
}

Vector restrict(const Vector& x, const SupportSet& support) {
  if (support.dimension() != x.size()) {
    throw InvalidArgument("support dimension " + std::to_string(support.dimension()) +
                          " does not match vector length " + std::to_string(x.size()));
  }
  Vector out = Vector::Zero(x.size());
  for (Index i : support) out[i] = x[i];
  return out;
}

double top_k_gradient_norm(const Vector& g, Index k) {
  double sum = 0.0;
  for (Index i : top_k_indices(g, k)) sum += g[i] * g[i];
  return std::sqrt(sum);
}

Index count_nonzeros(const Vector& x) { return (x.array() != 0.0).count(); }

}  // namespace difight
