#include "difight/cost.hpp"

#include "difight/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace difight {

namespace {

void check_dimension(const LeastSquaresCost& cost, const Vector& z) {
  if (z.size() != cost.dimension()) {
    throw InvalidArgument("point has length " + std::to_string(z.size()) + ", cost expects " +
                          std::to_string(cost.dimension()));
  }
}

struct Extremes {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;

  void absorb(const Matrix& hessian, const std::vector<Index>& support) {
    const auto n = static_cast<Index>(support.size());
    Matrix block(n, n);
    for (Index a = 0; a < n; ++a) {
      for (Index b = 0; b < n; ++b) block(a, b) = hessian(support[a], support[b]);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(block, Eigen::EigenvaluesOnly);
    lo = std::min(lo, solver.eigenvalues()[0]);
    hi = std::max(hi, solver.eigenvalues()[n - 1]);
  }

  CurvatureBounds bounds(Index order, bool exact) const {
    // Rank-deficient blocks can report eigenvalues a hair below zero.
    return CurvatureBounds{std::max(lo, 0.0), hi, order, exact};
  }
};

// Advances `combo` (strictly increasing indices into [0, n)) to the next
// k-subset in lexicographic order; false when exhausted.
bool next_combination(std::vector<Index>& combo, Index n) {
  const auto k = static_cast<Index>(combo.size());
  for (Index i = k - 1; i >= 0; --i) {
    if (combo[i] < n - k + i) {
      ++combo[i];
      for (Index j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

LeastSquaresCost::LeastSquaresCost(Matrix phi, Vector y, int node)
    : phi_(std::move(phi)), y_(std::move(y)), node_(node) {
  if (phi_.rows() != y_.size()) {
    throw InvalidArgument("measurement matrix has " + std::to_string(phi_.rows()) +
                          " rows but y has length " + std::to_string(y_.size()));
  }
  hessian_ = 2.0 * phi_.transpose() * phi_;
}

LeastSquaresCost LeastSquaresCost::stacked(std::span<const LeastSquaresCost> costs) {
  if (costs.empty()) throw InvalidArgument("cannot stack an empty set of costs");
  const Index n = costs.front().dimension();
  Index rows = 0;
  for (const auto& c : costs) {
    if (c.dimension() != n) throw InvalidArgument("stacked costs disagree on dimension");
    rows += c.measurements();
  }
  Matrix phi(rows, n);
  Vector y(rows);
  Index offset = 0;
  for (const auto& c : costs) {
    phi.middleRows(offset, c.measurements()) = c.phi();
    y.segment(offset, c.measurements()) = c.y();
    offset += c.measurements();
  }
  return LeastSquaresCost(std::move(phi), std::move(y), 0);
}

double LeastSquaresCost::value(const Vector& z) const {
  check_dimension(*this, z);
  return (y_ - phi_ * z).squaredNorm();
}

Vector LeastSquaresCost::gradient(const Vector& z) const {
  check_dimension(*this, z);
  return 2.0 * (phi_.transpose() * (phi_ * z - y_));
}

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (Index i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(out);
}

CurvatureBounds restricted_curvature(const LeastSquaresCost& cost, Index k,
                                     const CurvatureOptions& options) {
  const Index n = cost.dimension();
  if (k < 1 || k > n) {
    throw InvalidArgument("curvature order " + std::to_string(k) + " outside [1, " +
                          std::to_string(n) + "]");
  }
  const Matrix& hessian = cost.hessian();
  Extremes ext;

  if (options.mode == CurvatureMode::Exact) {
    const double count = binomial(n, k);
    if (count > options.enumeration_budget) {
      std::ostringstream msg;
      msg << "exact curvature needs C(" << n << "," << k << ") = " << count
          << " supports, budget is " << options.enumeration_budget << "; use sampled mode";
      throw BudgetExceeded(msg.str());
    }
    std::vector<Index> combo(static_cast<std::size_t>(k));
    std::iota(combo.begin(), combo.end(), Index{0});
    do {
      ext.absorb(hessian, combo);
    } while (next_combination(combo, n));
    return ext.bounds(k, true);
  }

  if (options.samples < 1) throw InvalidArgument("sampled curvature needs at least one sample");
  std::mt19937_64 rng(options.seed);
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  std::vector<Index> support(static_cast<std::size_t>(k));
  for (int s = 0; s < options.samples; ++s) {
    // Partial Fisher-Yates: the first k slots form a uniform k-subset.
    for (Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Index> pick(i, n - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    std::copy_n(pool.begin(), k, support.begin());
    std::sort(support.begin(), support.end());
    ext.absorb(hessian, support);
  }
  return ext.bounds(k, false);
}

CurvatureBounds support_curvature(const LeastSquaresCost& cost, const SupportSet& support) {
  if (support.dimension() != cost.dimension()) {
    throw InvalidArgument("support dimension does not match cost dimension");
  }
  if (support.empty()) return CurvatureBounds{0.0, 0.0, 0, true};
  Extremes ext;
  ext.absorb(cost.hessian(), support.indices());
  return ext.bounds(support.size(), true);
}

ContractionFactor contraction_factor(const CurvatureBounds& bounds, double mu) {
  if (!(bounds.alpha >= 0.0 && bounds.alpha <= bounds.beta)) {
    throw InvalidArgument("curvature bounds must satisfy 0 <= alpha <= beta");
  }
  if (!(mu > 0.0)) throw InvalidArgument("step size must be positive");
  const double mean = 0.5 * (bounds.beta + bounds.alpha);
  const double half_gap = 0.5 * (bounds.beta - bounds.alpha);
  ContractionFactor out;
  out.mu = mu;
  out.order = bounds.order;
  out.omega = std::abs(1.0 - mu * mean) + mu * half_gap;
  if (bounds.alpha + bounds.beta > 0.0) {
    out.optimal_mu = 2.0 / (bounds.alpha + bounds.beta);
    out.optimal_omega = (bounds.beta - bounds.alpha) / (bounds.beta + bounds.alpha);
  }
  return out;
}

double optimal_step_size(const CurvatureBounds& bounds) {
  if (!(bounds.alpha + bounds.beta > 0.0)) {
    throw InvalidArgument("step size undefined for zero curvature");
  }
  return 2.0 / (bounds.alpha + bounds.beta);
}

Lemma1Report check_lemma1(const LeastSquaresCost& cost, double rho, const SparseSignal& x,
                          const SparseSignal& y, const SparseSignal& z) {
  const Index n = cost.dimension();
  if (x.dimension() != n || y.dimension() != n || z.dimension() != n) {
    throw InvalidArgument("lemma check vectors must match the cost dimension");
  }
  if (!(rho >= 0.0)) throw InvalidArgument("rho must be nonnegative");

  const SupportSet union_support = x.support().united(y.support()).united(z.support());
  Lemma1Report report;
  report.rho = rho;
  report.bounds = support_curvature(cost, union_support);
  const double mean = 0.5 * (report.bounds.beta + report.bounds.alpha);
  const double half_gap = 0.5 * (report.bounds.beta - report.bounds.alpha);
  report.rho_prime = std::abs(1.0 - rho * mean) + rho * half_gap;

  const Vector diff = y.values() - z.values();
  const Vector g = diff - rho * (cost.gradient(y.values()) - cost.gradient(z.values()));
  const double diff_norm = diff.norm();
  report.inner_product = x.values().dot(g);
  report.inner_bound = report.rho_prime * x.values().norm() * diff_norm;
  report.restricted_norm = restrict(g, x.support()).norm();
  report.restricted_bound = report.rho_prime * diff_norm;
  return report;
}

}  // namespace difight
