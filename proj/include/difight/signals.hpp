#pragma once

#include <Eigen/Core>

#include <vector>

namespace difight {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Sorted, duplicate-free set of coordinates into a vector of length
/// `dimension()`. Indices are zero-based.
class SupportSet {
 public:
  SupportSet() = default;

  /// Sorts `indices`; throws InvalidArgument on duplicates or on any index
  /// outside [0, dimension).
  SupportSet(std::vector<Index> indices, Index dimension);

  /// Nonzero coordinates of `x`.
  static SupportSet of(const Vector& x);

  const std::vector<Index>& indices() const { return indices_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  Index dimension() const { return dimension_; }
  bool contains(Index i) const;

  SupportSet united(const SupportSet& other) const;

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> indices_;
  Index dimension_ = 0;
};

/// Dense vector with at most `sparsity()` nonzeros, stored together with its
/// support. Zero coordinates never belong to the support.
class SparseSignal {
 public:
  SparseSignal() = default;

  /// Throws InvalidArgument if `values` has more than `sparsity` nonzeros.
  SparseSignal(Vector values, Index sparsity);

  const Vector& values() const { return values_; }
  const SupportSet& support() const { return support_; }
  Index sparsity() const { return sparsity_; }
  Index dimension() const { return values_.size(); }

 private:
  Vector values_;
  SupportSet support_;
  Index sparsity_ = 0;
};

/// Best k-term approximation of `x` in the Euclidean norm: keeps the k
/// largest-magnitude entries and zeroes the rest. Among equal magnitudes the
/// lower index wins, so the result is deterministic.
///
/// Throws InvalidArgument unless 0 <= k <= x.size().
SparseSignal hard_threshold(const Vector& x, Index k);

/// Same as hard_threshold(x, k).values(), without building the support.
Vector hard_threshold_values(const Vector& x, Index k);

/// `x` with every entry outside `support` zeroed.
Vector restrict(const Vector& x, const SupportSet& support);

/// Euclidean norm of the k largest-magnitude entries of `g`.
double top_k_gradient_norm(const Vector& g, Index k);

/// Number of nonzero entries.
Index count_nonzeros(const Vector& x);

}  // namespace difight
